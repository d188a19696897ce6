/**
 * Minimal deterministic SVG plotting: fixed canvas, fixed tick layout, fixed
 * number formatting, no timestamps. Rendering the same scene twice yields
 * identical bytes.
 */

export interface Scene {
  title: string;
  xLabel: string;
  yLabel: string;
  xRange: [number, number];
  yRange: [number, number];
  bars?: { x0: number; x1: number; y: number }[];
  series?: { points: [number, number][]; color: string; dashed?: boolean }[];
  vlines?: { x: number; color: string; label?: string }[];
  hlines?: { y: number; color: string }[];
  logX?: boolean;
  logY?: boolean;
}

const W = 720;
const H = 480;
const M = { left: 72, right: 24, top: 40, bottom: 56 };

function fmt(v: number): string {
  return v.toFixed(2);
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return String(Math.round(v * 1000) / 1000);
}

export function renderScene(scene: Scene): string {
  const txf = scene.logX ? Math.log10 : (v: number) => v;
  const tyf = scene.logY ? Math.log10 : (v: number) => v;
  const [x0, x1] = scene.xRange.map(txf) as [number, number];
  const [y0, y1] = scene.yRange.map(tyf) as [number, number];
  const sx = (v: number) => M.left + ((txf(v) - x0) / (x1 - x0)) * (W - M.left - M.right);
  const sy = (v: number) => H - M.bottom - ((tyf(v) - y0) / (y1 - y0)) * (H - M.top - M.bottom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">${scene.title}</text>`,
  );

  // axes box and ticks (5 per axis, linear in the transformed scale)
  parts.push(
    `<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="black" stroke-width="1"/>`,
  );
  for (let i = 0; i <= 4; i++) {
    const tx = x0 + ((x1 - x0) * i) / 4;
    const vx = scene.logX ? 10 ** tx : tx;
    const px = M.left + ((W - M.left - M.right) * i) / 4;
    parts.push(
      `<line x1="${fmt(px)}" y1="${H - M.bottom}" x2="${fmt(px)}" y2="${H - M.bottom + 5}" stroke="black"/>`,
      `<text x="${fmt(px)}" y="${H - M.bottom + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${tickLabel(vx)}</text>`,
    );
    const ty = y0 + ((y1 - y0) * i) / 4;
    const vy = scene.logY ? 10 ** ty : ty;
    const py = H - M.bottom - ((H - M.top - M.bottom) * i) / 4;
    parts.push(
      `<line x1="${M.left - 5}" y1="${fmt(py)}" x2="${M.left}" y2="${fmt(py)}" stroke="black"/>`,
      `<text x="${M.left - 8}" y="${fmt(py + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${tickLabel(vy)}</text>`,
    );
  }
  parts.push(
    `<text x="${W / 2}" y="${H - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${scene.xLabel}</text>`,
    `<text x="18" y="${H / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${H / 2})">${scene.yLabel}</text>`,
  );

  for (const bar of scene.bars ?? []) {
    const left = sx(bar.x0);
    const right = sx(bar.x1);
    const top = sy(bar.y);
    const base = sy(scene.logY ? scene.yRange[0] : 0);
    parts.push(
      `<rect x="${fmt(left)}" y="${fmt(top)}" width="${fmt(right - left)}" height="${fmt(Math.max(0, base - top))}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>`,
    );
  }
  for (const line of scene.hlines ?? []) {
    parts.push(
      `<line x1="${M.left}" y1="${fmt(sy(line.y))}" x2="${W - M.right}" y2="${fmt(sy(line.y))}" stroke="${line.color}" stroke-width="1" stroke-dasharray="4 3"/>`,
    );
  }
  for (const line of scene.vlines ?? []) {
    parts.push(
      `<line x1="${fmt(sx(line.x))}" y1="${M.top}" x2="${fmt(sx(line.x))}" y2="${H - M.bottom}" stroke="${line.color}" stroke-width="1" stroke-dasharray="4 3"/>`,
    );
    if (line.label) {
      parts.push(
        `<text x="${fmt(sx(line.x) + 4)}" y="${M.top + 14}" font-family="sans-serif" font-size="11" fill="${line.color}">${line.label}</text>`,
      );
    }
  }
  for (const s of scene.series ?? []) {
    const pts = s.points.map(([x, y]) => `${fmt(sx(x))},${fmt(sy(y))}`).join(" ");
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
