// App wiring: store <-> viewer <-> panels, attribute editor, keyboard
// shortcuts, and the offline/conflict banners.

import { ApiClient } from './api';
import { ProjectionPanels } from './panels';
import { ReviewStore } from './state';
import type { Vec3 } from './types';
import { Viewer } from './viewer';

const NUDGE_POS = 0.02; // meters per keypress
const NUDGE_DIM = 0.02;
const NUDGE_YAW = Math.PI / 90; // 2 degrees

const SHORTCUTS: [string, string][] = [
  ['arrows / PgUp / PgDn', 'move center (x/z, y)'],
  ['w / W', 'grow / shrink width'],
  ['h / H', 'grow / shrink height'],
  ['l / L', 'grow / shrink length'],
  ['q / e', 'rotate yaw'],
  ['tab', 'next box'],
  ['n', 'next image'],
  ['x', 'delete box'],
  ['r', 'reject image'],
  ['?', 'toggle this help'],
];

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

async function boot() {
  const api = new ApiClient('');
  const store = new ReviewStore(api);
  const viewer = new Viewer(el('viewport'));
  const panels = new ProjectionPanels(el('panels'));

  viewer.onSelect = (boxId) => store.selectBox(boxId);

  const imageList = el<HTMLSelectElement>('image-list');
  imageList.addEventListener('change', () => {
    void store.openImage(imageList.value);
  });

  const attrTable = el('attrs');
  const banner = el('banner');
  const help = el('help');
  help.innerHTML =
    '<h3>Shortcuts</h3>' +
    SHORTCUTS.map(([k, d]) => `<div><code>${k}</code> ${d}</div>`).join('');

  function refreshImages() {
    imageList.innerHTML = '';
    for (const im of store.images) {
      const opt = document.createElement('option');
      opt.value = im.id;
      opt.textContent = `${im.id} (${im.n_boxes} boxes${im.rejected ? ', rejected' : ''})`;
      imageList.appendChild(opt);
    }
    if (store.activeImageId) imageList.value = store.activeImageId;
  }

  function refreshScene() {
    if (!store.scene) {
      viewer.setPoints([]);
      viewer.setBoxes([], null);
      panels.render([], null);
      attrTable.textContent = 'no image loaded';
      return;
    }
    viewer.setPoints(store.scene.points);
    viewer.setBoxes(store.scene.boxes, store.selectedBoxId);
    panels.render(store.scene.points, store.selectedBox);
    const box = store.selectedBox;
    if (!box || !box.center_cam || !box.dims) {
      attrTable.textContent = 'no box selected';
      return;
    }
    const fmt = (v: number) => v.toFixed(3);
    attrTable.innerHTML = `
      <div>id <code>${box.id}</code> (${box.category}, ${box.provenance})</div>
      <div>center [${box.center_cam.map(fmt).join(', ')}] m</div>
      <div>dims (w,h,l) [${box.dims.map(fmt).join(', ')}] m</div>
      <div>score ${box.score.toFixed(2)} rev ${box.rev}</div>`;
  }

  function refreshBanner() {
    if (store.conflict) {
      banner.textContent = 'Edit conflict: reload and reapply? (press c)';
      banner.className = 'banner conflict';
    } else if (store.offline) {
      banner.textContent = 'Service unreachable: edits queued (press f to retry)';
      banner.className = 'banner offline';
    } else if (store.dirty) {
      banner.textContent = 'saving...';
      banner.className = 'banner dirty';
    } else {
      banner.textContent = '';
      banner.className = 'banner';
    }
  }

  store.subscribe((event) => {
    if (event === 'images') refreshImages();
    if (event === 'scene' || event === 'selection') refreshScene();
    refreshBanner();
  });

  const edit = (delta: { center?: Vec3; dims?: Vec3; yaw?: number }) =>
    void store.editSelected(delta);

  window.addEventListener('keydown', (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    switch (ev.key) {
      case 'ArrowLeft': edit({ center: [-NUDGE_POS, 0, 0] }); break;
      case 'ArrowRight': edit({ center: [NUDGE_POS, 0, 0] }); break;
      case 'ArrowUp': edit({ center: [0, 0, NUDGE_POS] }); break;
      case 'ArrowDown': edit({ center: [0, 0, -NUDGE_POS] }); break;
      case 'PageUp': edit({ center: [0, -NUDGE_POS, 0] }); break;
      case 'PageDown': edit({ center: [0, NUDGE_POS, 0] }); break;
      case 'w': edit({ dims: [NUDGE_DIM, 0, 0] }); break;
      case 'W': edit({ dims: [-NUDGE_DIM, 0, 0] }); break;
      case 'h': edit({ dims: [0, NUDGE_DIM, 0] }); break;
      case 'H': edit({ dims: [0, -NUDGE_DIM, 0] }); break;
      case 'l': edit({ dims: [0, 0, NUDGE_DIM] }); break;
      case 'L': edit({ dims: [0, 0, -NUDGE_DIM] }); break;
      case 'q': edit({ yaw: NUDGE_YAW }); break;
      case 'e': edit({ yaw: -NUDGE_YAW }); break;
      case 'Tab': {
        ev.preventDefault();
        const boxes = store.scene?.boxes.filter((b) => b.center_cam) ?? [];
        if (boxes.length > 0) {
          const at = boxes.findIndex((b) => b.id === store.selectedBoxId);
          store.selectBox(boxes[(at + 1) % boxes.length].id);
        }
        break;
      }
      case 'n': void store.advance(); break;
      case 'x':
        if (store.selectedBox && window.confirm(`Delete box ${store.selectedBox.id}?`)) {
          void store.deleteSelected();
        }
        break;
      case 'r':
        if (store.activeImageId && window.confirm(`Reject image ${store.activeImageId}?`)) {
          void store.rejectActiveImage();
        }
        break;
      case 'c': if (store.conflict) void store.resolveConflict(); break;
      case 'f': void store.flushQueue(); break;
      case '?': help.classList.toggle('visible'); break;
    }
  });

  await store.loadImages();
  await store.advance();
}

void boot();
