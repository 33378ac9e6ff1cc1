/** Linear axis scaling with round tick positions. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map(value: number): number;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    // degenerate extent: pad so single points land mid-range
    d0 -= 0.5;
    d1 += 0.5;
  }
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  return {
    domain: [d0, d1],
    range,
    map: (v: number) => r0 + (v - d0) * k,
  };
}

/** Round tick values covering the domain, roughly `count` of them. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) {
    return [lo];
  }
  const rawStep = (hi - lo) / Math.max(count, 1);
  const power = Math.floor(Math.log10(rawStep));
  const base = Math.pow(10, power);
  let step = base;
  for (const mult of [1, 2, 2.5, 5, 10]) {
    step = mult * base;
    if (step >= rawStep) break;
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/** Compact tick label: fixed for friendly magnitudes, scientific otherwise. */
export function tickLabel(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e5 || abs < 1e-3) {
    return value.toExponential(1).replace("e+", "e");
  }
  if (Number.isInteger(value)) return value.toString();
  const digits = Math.max(0, 3 - Math.floor(Math.log10(abs)) - 1);
  return value.toFixed(Math.min(6, Math.max(0, digits)));
}
