/** Top-down scene: the closed circuit to scale, vehicle pose, reference
 * point, and the trail of received positions.
 *
 * All geometry is pure and unit-tested; drawing goes through the narrow
 * `Draw2D` slice of CanvasRenderingContext2D so tests can record the calls.
 */
import type { TrackDims } from "./protocol.js";
import type { SessionStore } from "./state.js";

export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

/** Polyline around the circuit: two straights joined by two CCW semicircles.
 *
 * Matches the server's layout: start (0,0) heading +x, first straight to
 * (L,0), arc about (L,R) up to (L,2R), return straight to (0,2R), arc about
 * (0,R) closing the loop. Arc points follow (cx + R sin h, cy − R cos h).
 */
export function circuitPath(dims: TrackDims, step = 2.0): Array<[number, number]> {
  const L = dims.straight_len;
  const R = dims.radius;
  const pts: Array<[number, number]> = [];
  const straightN = Math.max(1, Math.ceil(L / step));
  const arcN = Math.max(2, Math.ceil(dims.arc_len / step));
  for (let i = 0; i < straightN; i++) pts.push([(L * i) / straightN, 0]);
  for (let i = 0; i < arcN; i++) {
    const h = (Math.PI * i) / arcN;
    pts.push([L + R * Math.sin(h), R - R * Math.cos(h)]);
  }
  for (let i = 0; i < straightN; i++) pts.push([L - (L * i) / straightN, 2 * R]);
  for (let i = 0; i < arcN; i++) {
    const h = Math.PI + (Math.PI * i) / arcN;
    pts.push([R * Math.sin(h), R - R * Math.cos(h)]);
  }
  pts.push([0, 0]); // close the loop exactly
  return pts;
}

export interface Transform {
  scale: number;
  toCanvas(x: number, y: number): [number, number];
}

/** World→canvas mapping: uniform scale, centered, y flipped (screen y down). */
export function makeTransform(
  dims: TrackDims,
  width: number,
  height: number,
  margin = 24,
): Transform {
  const R = dims.radius;
  const minX = -R;
  const maxX = dims.straight_len + R;
  const minY = -R * 0.2; // small apron below the first straight
  const maxY = 2 * R + R * 0.2;
  const scale = Math.min(
    (width - 2 * margin) / (maxX - minX),
    (height - 2 * margin) / (maxY - minY),
  );
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return {
    scale,
    toCanvas(x: number, y: number): [number, number] {
      return [width / 2 + (x - cx) * scale, height / 2 - (y - cy) * scale];
    },
  };
}

/** Triangle marker for the vehicle, nose along its heading (world coords). */
export function vehicleMarker(
  x: number,
  y: number,
  yaw: number,
  size: number,
): Array<[number, number]> {
  const c = Math.cos(yaw);
  const s = Math.sin(yaw);
  const local: Array<[number, number]> = [
    [size, 0],
    [-0.6 * size, 0.5 * size],
    [-0.6 * size, -0.5 * size],
  ];
  return local.map(([px, py]) => [x + c * px - s * py, y + s * px + c * py]);
}

function drawPolyline(ctx: Draw2D, tf: Transform, pts: Array<[number, number]>, close = false) {
  if (pts.length === 0) return;
  ctx.beginPath();
  const first = tf.toCanvas(pts[0]![0], pts[0]![1]);
  ctx.moveTo(first[0], first[1]);
  for (let i = 1; i < pts.length; i++) {
    const p = tf.toCanvas(pts[i]![0], pts[i]![1]);
    ctx.lineTo(p[0], p[1]);
  }
  if (close) ctx.closePath();
  ctx.stroke();
}

export function renderScene(
  ctx: Draw2D,
  store: SessionStore,
  width: number,
  height: number,
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);
  if (!store.hello) return;
  const dims = store.hello.track;
  const tf = makeTransform(dims, width, height);
  if (store.connection !== "open") ctx.globalAlpha = 0.35; // grayed when lost

  ctx.strokeStyle = "#3b4656";
  ctx.lineWidth = 3;
  drawPolyline(ctx, tf, circuitPath(dims));

  if (store.trail.length > 1) {
    ctx.strokeStyle = "#3fa7ff";
    ctx.lineWidth = 1.5;
    drawPolyline(ctx, tf, store.trail);
  }

  const row = store.latest;
  if (row) {
    // reference point: small cross
    const [rx, ry] = tf.toCanvas(row.ref_x, row.ref_y);
    ctx.strokeStyle = "#ffd166";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(rx - 5, ry);
    ctx.lineTo(rx + 5, ry);
    ctx.moveTo(rx, ry - 5);
    ctx.lineTo(rx, ry + 5);
    ctx.stroke();

    // vehicle: heading triangle sized in meters so it scales with the view
    const tri = vehicleMarker(row.x, row.y, row.yaw, 9 / tf.scale)
      .map(([px, py]) => tf.toCanvas(px, py));
    ctx.fillStyle = row.mode === "AUTO" ? "#7bd88f" : row.mode === "BRAIN" ? "#ff7b72" : "#d2a8ff";
    ctx.beginPath();
    ctx.moveTo(tri[0]![0], tri[0]![1]);
    ctx.lineTo(tri[1]![0], tri[1]![1]);
    ctx.lineTo(tri[2]![0], tri[2]![1]);
    ctx.closePath();
    ctx.fill();

    drawAltitudeGauge(ctx, width, height, row.z, row.ref_z, 2 * dims.altitude);
  }
  ctx.globalAlpha = 1;
}

/** Vertical bar at the right edge: current altitude with a reference tick. */
export function altitudeGaugeFill(z: number, zMax: number): number {
  if (zMax <= 0) return 0;
  return Math.min(1, Math.max(0, z / zMax));
}

function drawAltitudeGauge(
  ctx: Draw2D,
  width: number,
  height: number,
  z: number,
  refZ: number,
  zMax: number,
): void {
  const barW = 10;
  const x = width - barW - 12;
  const top = 20;
  const barH = height - 40;
  ctx.fillStyle = "#222936";
  ctx.fillRect(x, top, barW, barH);
  const fill = altitudeGaugeFill(z, zMax);
  ctx.fillStyle = "#3fa7ff";
  ctx.fillRect(x, top + barH * (1 - fill), barW, barH * fill);
  const refFill = altitudeGaugeFill(refZ, zMax);
  const refY = top + barH * (1 - refFill);
  ctx.strokeStyle = "#ffd166";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(x - 3, refY);
  ctx.lineTo(x + barW + 3, refY);
  ctx.stroke();
}
