// Main 3D panel: scene point cloud with selectable box wireframes.

import * as THREE from 'three';
import { OrbitControls } from 'three/examples/jsm/controls/OrbitControls.js';
import { BOX_EDGES, boxCorners } from './boxmath';
import type { BoxRecord, Vec3 } from './types';

const COLOR_BOX = 0x4caf50;
const COLOR_SELECTED = 0xffc107;
const COLOR_REJECTED = 0x9e9e9e;

export class Viewer {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private controls: OrbitControls;
  private pointCloud: THREE.Points | null = null;
  private boxGroup = new THREE.Group();
  private raycaster = new THREE.Raycaster();
  onSelect: ((boxId: string) => void) | null = null;

  constructor(private container: HTMLElement) {
    this.camera = new THREE.PerspectiveCamera(
      55,
      container.clientWidth / container.clientHeight,
      0.01,
      200,
    );
    // camera frame is y-down/z-forward; start slightly behind the origin
    this.camera.position.set(0, -1.5, -4);
    this.camera.up.set(0, -1, 0);
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    this.renderer.setClearColor(0x111418);
    container.appendChild(this.renderer.domElement);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 5);
    this.scene.add(this.boxGroup);
    this.scene.add(new THREE.AxesHelper(0.5));

    this.renderer.domElement.addEventListener('pointerdown', (ev) => this.pick(ev));
    window.addEventListener('resize', () => this.resize());
    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  private resize() {
    const w = this.container.clientWidth;
    const h = this.container.clientHeight;
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(w, h);
  }

  setPoints(points: Vec3[]) {
    if (this.pointCloud) {
      this.scene.remove(this.pointCloud);
      this.pointCloud.geometry.dispose();
    }
    const positions = new Float32Array(points.length * 3);
    for (let i = 0; i < points.length; i++) {
      positions[3 * i] = points[i][0];
      positions[3 * i + 1] = points[i][1];
      positions[3 * i + 2] = points[i][2];
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute('position', new THREE.BufferAttribute(positions, 3));
    const material = new THREE.PointsMaterial({ size: 0.02, color: 0x8ab4f8 });
    this.pointCloud = new THREE.Points(geometry, material);
    this.scene.add(this.pointCloud);
    if (points.length > 0) {
      const mid = points[Math.floor(points.length / 2)];
      this.controls.target.set(mid[0], mid[1], mid[2]);
    }
  }

  setBoxes(boxes: BoxRecord[], selectedId: string | null) {
    this.boxGroup.clear();
    for (const box of boxes) {
      if (!box.center_cam || !box.dims || !box.R) continue;
      const corners = boxCorners(box.center_cam, box.dims, box.R);
      const positions: number[] = [];
      for (const [a, b] of BOX_EDGES) {
        positions.push(...corners[a], ...corners[b]);
      }
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute('position', new THREE.Float32BufferAttribute(positions, 3));
      const color =
        box.id === selectedId
          ? COLOR_SELECTED
          : box.provenance === 'rejected'
            ? COLOR_REJECTED
            : COLOR_BOX;
      const lines = new THREE.LineSegments(
        geometry,
        new THREE.LineBasicMaterial({ color, linewidth: 2 }),
      );
      lines.userData.boxId = box.id;
      this.boxGroup.add(lines);
    }
  }

  private pick(ev: PointerEvent) {
    if (!this.onSelect) return;
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.params.Line = { threshold: 0.05 };
    this.raycaster.setFromCamera(ndc, this.camera);
    const hits = this.raycaster.intersectObjects(this.boxGroup.children, false);
    if (hits.length > 0) {
      this.onSelect(hits[0].object.userData.boxId as string);
    }
  }
}
