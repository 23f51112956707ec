/**
 * Pure layout math for the histogram chart. The SVG renderer consumes these
 * numbers verbatim, so bar-height ratios can be verified without a browser.
 */

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number; // pixels; equals heightValue * unitScale
}

export interface ChartLayout {
  width: number;
  height: number;
  bars: Bar[];
  referenceY: number; // y of the flat-histogram line (height value 1)
  unitScale: number; // pixels per height unit
}

export interface ChartOptions {
  width?: number;
  height?: number;
  gapFraction?: number; // share of one bar slot left as spacing
  headroom?: number; // extra scale above the tallest bar
}

export const DEFAULT_WIDTH = 520;
export const DEFAULT_HEIGHT = 300;

export function barLayout(heights: number[], opts: ChartOptions = {}): ChartLayout {
  if (heights.length < 2) throw new Error('need at least two bins');
  if (heights.some((h) => h < 0 || !Number.isFinite(h))) {
    throw new Error('bar heights must be finite and non-negative');
  }
  const width = opts.width ?? DEFAULT_WIDTH;
  const height = opts.height ?? DEFAULT_HEIGHT;
  const gapFraction = opts.gapFraction ?? 0.1;
  const headroom = opts.headroom ?? 1.08;

  // keep the reference line on screen even for flat-ish histograms
  const maxValue = Math.max(1.25, Math.max(...heights) * headroom);
  const unitScale = height / maxValue;

  const slot = width / heights.length;
  const barWidth = slot * (1 - gapFraction);
  const bars = heights.map((h, i) => {
    const px = h * unitScale;
    return {
      x: i * slot + (slot - barWidth) / 2,
      y: height - px,
      width: barWidth,
      height: px,
    };
  });
  return { width, height, bars, referenceY: height - unitScale, unitScale };
}
