// Review-session state: active image, selection, optimistic edits, and
// the pending-edit queue used while the service is unreachable.

import { ApiClient, ConflictError } from './api';
import { applyDelta } from './boxmath';
import type { BoxDelta, BoxRecord, ImageDetail, ImageSummary, Vec3 } from './types';

export interface EditDelta {
  center?: Vec3;
  dims?: Vec3;
  yaw?: number;
}

export type StoreEvent =
  | 'images'
  | 'scene'
  | 'selection'
  | 'dirty'
  | 'offline'
  | 'conflict';

type Listener = (event: StoreEvent) => void;

export class ReviewStore {
  images: ImageSummary[] = [];
  scene: ImageDetail | null = null;
  activeImageId: string | null = null;
  selectedBoxId: string | null = null;
  dirty = false;
  offline = false;
  conflict = false;
  private queue: { boxId: string; delta: EditDelta }[] = [];
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(event: StoreEvent) {
    for (const fn of this.listeners) fn(event);
  }

  async loadImages(): Promise<void> {
    this.images = await this.api.listImages();
    this.emit('images');
  }

  async openImage(imageId: string): Promise<void> {
    this.scene = await this.api.getImage(imageId);
    this.activeImageId = imageId;
    const first = this.scene.boxes.find((b) => b.center_cam !== null);
    this.selectedBoxId = first ? first.id : null;
    this.emit('scene');
    this.emit('selection');
  }

  selectBox(boxId: string | null): void {
    if (boxId !== null && !this.scene?.boxes.some((b) => b.id === boxId)) {
      return; // selection must belong to the active image
    }
    this.selectedBoxId = boxId;
    this.emit('selection');
  }

  get selectedBox(): BoxRecord | null {
    if (!this.scene || this.selectedBoxId === null) return null;
    return this.scene.boxes.find((b) => b.id === this.selectedBoxId) ?? null;
  }

  /** Optimistically apply an edit, then persist it; queue it when offline. */
  async editSelected(delta: EditDelta): Promise<void> {
    const box = this.selectedBox;
    if (!box || !this.scene) return;
    const updated = applyDelta(box, delta);
    this.scene.boxes = this.scene.boxes.map((b) => (b.id === box.id ? updated : b));
    this.dirty = true;
    this.emit('scene');
    this.emit('dirty');

    const payload: BoxDelta = { ...delta, rev: box.rev };
    try {
      const ack = await this.api.patchBox(box.id, payload);
      this.scene.boxes = this.scene.boxes.map((b) => (b.id === box.id ? ack : b));
      this.dirty = this.queue.length > 0;
      this.offline = false;
      this.emit('scene');
      this.emit('dirty');
    } catch (err) {
      if (err instanceof ConflictError) {
        // someone else edited this box: reload and ask to reapply
        this.conflict = true;
        this.emit('conflict');
        return;
      }
      this.queue.push({ boxId: box.id, delta });
      this.offline = true;
      this.emit('offline');
    }
  }

  /** Retry queued edits after the service comes back. */
  async flushQueue(): Promise<void> {
    while (this.queue.length > 0) {
      const { boxId, delta } = this.queue[0];
      const current = this.scene?.boxes.find((b) => b.id === boxId);
      if (!current) {
        this.queue.shift();
        continue;
      }
      try {
        const ack = await this.api.patchBox(boxId, { ...delta });
        if (this.scene) {
          this.scene.boxes = this.scene.boxes.map((b) => (b.id === boxId ? ack : b));
        }
        this.queue.shift();
      } catch (err) {
        if (err instanceof ConflictError) {
          this.queue.shift();
          this.conflict = true;
          this.emit('conflict');
          continue;
        }
        this.offline = true;
        this.emit('offline');
        return;
      }
    }
    this.offline = false;
    this.dirty = false;
    this.emit('dirty');
    this.emit('offline');
  }

  /** Reload the active image and drop local state after a 409. */
  async resolveConflict(): Promise<void> {
    this.conflict = false;
    this.queue = [];
    this.dirty = false;
    if (this.activeImageId) await this.openImage(this.activeImageId);
    this.emit('conflict');
    this.emit('dirty');
  }

  async deleteSelected(): Promise<void> {
    const box = this.selectedBox;
    if (!box || !this.scene) return;
    await this.api.deleteBox(box.id);
    this.scene.boxes = this.scene.boxes.filter((b) => b.id !== box.id);
    const next = this.scene.boxes.find((b) => b.center_cam !== null);
    this.selectedBoxId = next ? next.id : null;
    this.emit('scene');
    this.emit('selection');
  }

  async rejectActiveImage(): Promise<void> {
    if (!this.activeImageId) return;
    await this.api.rejectImage(this.activeImageId);
    await this.loadImages();
    await this.advance();
  }

  /** Move to the next non-rejected image, wrapping around. */
  async advance(): Promise<void> {
    if (this.images.length === 0) return;
    const ids = this.images.filter((im) => !im.rejected).map((im) => im.id);
    if (ids.length === 0) {
      this.scene = null;
      this.activeImageId = null;
      this.selectedBoxId = null;
      this.emit('scene');
      return;
    }
    const at = this.activeImageId ? ids.indexOf(this.activeImageId) : -1;
    await this.openImage(ids[(at + 1) % ids.length]);
  }
}
