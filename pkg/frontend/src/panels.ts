// Three orthographic 2D projections of the point cloud along the selected
// box's local axes, with the box outline overlaid.

import { panelAxisLabels, projectToPanel, type PanelKind } from './boxmath';
import type { BoxRecord, Vec3 } from './types';

const PANEL_KINDS: PanelKind[] = ['top', 'front', 'side'];
const MARGIN = 1.6; // view half-extent as a multiple of the box half-extent

export class ProjectionPanels {
  private canvases = new Map<PanelKind, HTMLCanvasElement>();

  constructor(container: HTMLElement) {
    for (const kind of PANEL_KINDS) {
      const wrap = document.createElement('div');
      wrap.className = 'panel';
      const label = document.createElement('div');
      label.className = 'panel-label';
      wrap.appendChild(label);
      const canvas = document.createElement('canvas');
      canvas.width = 220;
      canvas.height = 220;
      wrap.appendChild(canvas);
      container.appendChild(wrap);
      this.canvases.set(kind, canvas);
      const [ax, ay] = panelAxisLabels(kind);
      label.textContent = `${kind} (box ${ax}/${ay})`;
    }
  }

  render(points: Vec3[], box: BoxRecord | null) {
    for (const kind of PANEL_KINDS) {
      const canvas = this.canvases.get(kind)!;
      const ctx = canvas.getContext('2d')!;
      ctx.fillStyle = '#14171c';
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      if (!box || !box.center_cam || !box.dims || !box.R) continue;

      const { xy, halfExtent } = projectToPanel(
        points,
        { center_cam: box.center_cam, dims: box.dims, R: box.R },
        kind,
      );
      const scale =
        Math.min(canvas.width, canvas.height) /
        (2 * MARGIN * Math.max(halfExtent[0], halfExtent[1], 1e-6));
      const cx = canvas.width / 2;
      const cy = canvas.height / 2;

      ctx.fillStyle = '#8ab4f8';
      for (const [px, py] of xy) {
        const sx = cx + px * scale;
        const sy = cy - py * scale;
        if (sx >= 0 && sx < canvas.width && sy >= 0 && sy < canvas.height) {
          ctx.fillRect(sx, sy, 1.5, 1.5);
        }
      }

      ctx.strokeStyle = '#ffc107';
      ctx.lineWidth = 1.5;
      ctx.strokeRect(
        cx - halfExtent[0] * scale,
        cy - halfExtent[1] * scale,
        2 * halfExtent[0] * scale,
        2 * halfExtent[1] * scale,
      );
    }
  }
}
