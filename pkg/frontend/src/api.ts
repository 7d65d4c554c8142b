// Thin typed client for the review service endpoints.

import type { AuditEntry, BoxDelta, BoxRecord, ImageDetail, ImageSummary } from './types';

export class ConflictError extends Error {
  constructor(reason: string) {
    super(reason);
    this.name = 'ConflictError';
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let reason = response.statusText;
      try {
        const body = (await response.json()) as { reason?: string };
        if (body.reason) reason = body.reason;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 409) throw new ConflictError(reason);
      throw new Error(`${response.status}: ${reason}`);
    }
    return (await response.json()) as T;
  }

  listImages(): Promise<ImageSummary[]> {
    return this.request('/images');
  }

  getImage(imageId: string): Promise<ImageDetail> {
    return this.request(`/images/${encodeURIComponent(imageId)}`);
  }

  patchBox(boxId: string, delta: BoxDelta): Promise<BoxRecord> {
    return this.request(`/boxes/${boxId}`, {
      method: 'PATCH',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(delta),
    });
  }

  deleteBox(boxId: string): Promise<{ deleted: string }> {
    return this.request(`/boxes/${boxId}`, { method: 'DELETE' });
  }

  rejectImage(imageId: string): Promise<{ rejected: string }> {
    return this.request(`/images/${encodeURIComponent(imageId)}/reject`, { method: 'POST' });
  }

  getAudit(): Promise<AuditEntry[]> {
    return this.request('/audit');
  }
}
