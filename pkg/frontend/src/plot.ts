/**
 * Two-panel regret figure: per-round step regret on the left,
 * cumulative regret on the right, one mean line plus a +-1 std band per
 * curve group.
 */

import { CurveGroup, SummaryRow, groupCurves } from "./csv.js";
import { Canvas, RGB } from "./raster.js";
import { linearScale, tickLabel, ticks } from "./scale.js";

const PALETTE: RGB[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
  [127, 127, 127],
];

const BLACK: RGB = [0, 0, 0];
const GREY: RGB = [200, 200, 200];
const BAND_ALPHA = 0.25;

interface PanelSpec {
  title: string;
  groups: CurveGroup[];
  x: number;
  y: number;
  width: number;
  height: number;
  xLabel: string;
  yLabel: string;
  legend: boolean;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function drawPanel(canvas: Canvas, spec: PanelSpec): void {
  const inner = {
    x: spec.x + 58,
    y: spec.y + 24,
    w: spec.width - 74,
    h: spec.height - 66,
  };
  const xs = spec.groups.flatMap((g) => g.t);
  const ys = spec.groups.flatMap((g) => [
    ...g.mean.map((m, i) => m - g.std[i]),
    ...g.mean.map((m, i) => m + g.std[i]),
  ]);
  const [xLo, xHi] = extent(xs);
  let [yLo, yHi] = extent(ys);
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  } else {
    const pad = 0.05 * (yHi - yLo);
    yLo -= pad;
    yHi += pad;
  }
  const sx = linearScale([xLo, xHi], [inner.x, inner.x + inner.w]);
  const sy = linearScale([yLo, yHi], [inner.y + inner.h, inner.y]);

  // frame and ticks
  canvas.drawLine(inner.x, inner.y, inner.x, inner.y + inner.h, BLACK);
  canvas.drawLine(
    inner.x, inner.y + inner.h, inner.x + inner.w, inner.y + inner.h, BLACK,
  );
  for (const tx of ticks(sx.domain, 5)) {
    const px = Math.round(sx.map(tx));
    canvas.drawLine(px, inner.y, px, inner.y + inner.h, GREY);
    canvas.drawLine(px, inner.y + inner.h, px, inner.y + inner.h + 3, BLACK);
    const label = tickLabel(tx);
    canvas.text(px - Math.floor(Canvas.textWidth(label) / 2), inner.y + inner.h + 7, label, BLACK);
  }
  for (const ty of ticks(sy.domain, 5)) {
    const py = Math.round(sy.map(ty));
    canvas.drawLine(inner.x, py, inner.x + inner.w, py, GREY);
    canvas.drawLine(inner.x - 3, py, inner.x, py, BLACK);
    const label = tickLabel(ty);
    canvas.text(inner.x - 6 - Canvas.textWidth(label), py - 3, label, BLACK);
  }
  canvas.drawLine(inner.x, inner.y, inner.x, inner.y + inner.h, BLACK);
  canvas.drawLine(
    inner.x, inner.y + inner.h, inner.x + inner.w, inner.y + inner.h, BLACK,
  );

  // title and axis labels
  canvas.text(
    spec.x + Math.floor((spec.width - Canvas.textWidth(spec.title)) / 2),
    spec.y + 6,
    spec.title,
    BLACK,
  );
  canvas.text(
    inner.x + Math.floor((inner.w - Canvas.textWidth(spec.xLabel)) / 2),
    spec.y + spec.height - 14,
    spec.xLabel,
    BLACK,
  );
  canvas.text(spec.x + 4, spec.y + 8, spec.yLabel, BLACK);

  // bands first, then mean lines on top
  spec.groups.forEach((group, gi) => {
    const color = PALETTE[gi % PALETTE.length];
    if (group.t.length === 1) {
      const px = Math.round(sx.map(group.t[0]));
      const lo = Math.round(sy.map(group.mean[0] - group.std[0]));
      const hi = Math.round(sy.map(group.mean[0] + group.std[0]));
      for (let x = px - 2; x <= px + 2; x++) {
        canvas.blendColumn(x, hi, lo, color, BAND_ALPHA);
      }
      return;
    }
    const x0 = Math.round(sx.map(group.t[0]));
    const x1 = Math.round(sx.map(group.t[group.t.length - 1]));
    for (let px = x0; px <= x1; px++) {
      const tAt = sx.domain[0] + ((px - inner.x) / inner.w) * (sx.domain[1] - sx.domain[0]);
      const upper = interp(group.t, group.mean, group.std, tAt, +1);
      const lower = interp(group.t, group.mean, group.std, tAt, -1);
      canvas.blendColumn(px, Math.round(sy.map(upper)), Math.round(sy.map(lower)), color, BAND_ALPHA);
    }
  });
  spec.groups.forEach((group, gi) => {
    const color = PALETTE[gi % PALETTE.length];
    if (group.t.length === 1) {
      const px = Math.round(sx.map(group.t[0]));
      const py = Math.round(sy.map(group.mean[0]));
      canvas.fillRect(px - 2, py - 2, 5, 5, color);
      return;
    }
    for (let i = 1; i < group.t.length; i++) {
      canvas.drawLine(
        Math.round(sx.map(group.t[i - 1])),
        Math.round(sy.map(group.mean[i - 1])),
        Math.round(sx.map(group.t[i])),
        Math.round(sy.map(group.mean[i])),
        color,
      );
    }
  });

  if (spec.legend) {
    let ly = inner.y + 4;
    spec.groups.forEach((group, gi) => {
      const color = PALETTE[gi % PALETTE.length];
      const lx = inner.x + inner.w - Canvas.textWidth(group.label) - 26;
      canvas.fillRect(lx, ly + 2, 14, 3, color);
      canvas.text(lx + 18, ly, group.label, BLACK);
      ly += 12;
    });
  }
}

function interp(
  t: number[],
  mean: number[],
  std: number[],
  at: number,
  sign: number,
): number {
  if (at <= t[0]) return mean[0] + sign * std[0];
  const last = t.length - 1;
  if (at >= t[last]) return mean[last] + sign * std[last];
  let i = 1;
  while (t[i] < at) i++;
  const w = (at - t[i - 1]) / (t[i] - t[i - 1]);
  const m = mean[i - 1] + w * (mean[i] - mean[i - 1]);
  const s = std[i - 1] + w * (std[i] - std[i - 1]);
  return m + sign * s;
}

export interface FigureOptions {
  groupBy: "learner" | "eta";
  width?: number;
  height?: number;
}

/** Render the two-panel mean +- std figure, returning PNG bytes. */
export function renderFigure(rows: SummaryRow[], options: FigureOptions): Buffer {
  const width = options.width ?? 960;
  const height = options.height ?? 400;
  const canvas = new Canvas(width, height);
  const half = Math.floor(width / 2);
  drawPanel(canvas, {
    title: "step regret (mean +- std)",
    groups: groupCurves(rows, options.groupBy, "step"),
    x: 0,
    y: 0,
    width: half,
    height,
    xLabel: "round",
    yLabel: "step",
    legend: true,
  });
  drawPanel(canvas, {
    title: "cumulative regret (mean +- std)",
    groups: groupCurves(rows, options.groupBy, "cum"),
    x: half,
    y: 0,
    width: width - half,
    height,
    xLabel: "round",
    yLabel: "cum",
    legend: false,
  });
  return canvas.encodePNG();
}
