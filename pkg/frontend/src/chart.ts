import { barLayout, ChartOptions } from './geometry.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

/**
 * Render a blinded histogram: equal-width bars plus a reference line at
 * height one. Deliberately free of numeric annotations.
 */
export function renderHistogram(
  container: HTMLElement,
  heights: number[],
  opts: ChartOptions = {},
): SVGSVGElement {
  const layout = barLayout(heights, opts);
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('class', 'histogram');
  svg.setAttribute('viewBox', `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute('width', String(layout.width));
  svg.setAttribute('height', String(layout.height));

  for (const bar of layout.bars) {
    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.setAttribute('class', 'histogram-bar');
    rect.setAttribute('x', String(bar.x));
    rect.setAttribute('y', String(bar.y));
    rect.setAttribute('width', String(bar.width));
    rect.setAttribute('height', String(bar.height));
    svg.appendChild(rect);
  }

  const ref = document.createElementNS(SVG_NS, 'line');
  ref.setAttribute('class', 'reference-line');
  ref.setAttribute('x1', '0');
  ref.setAttribute('x2', String(layout.width));
  ref.setAttribute('y1', String(layout.referenceY));
  ref.setAttribute('y2', String(layout.referenceY));
  svg.appendChild(ref);

  container.replaceChildren(svg);
  return svg;
}

/** Simple polyline chart for the misclassification curves on the results view. */
export function renderCurve(
  container: HTMLElement,
  xs: number[],
  ys: number[],
  label: string,
  size = { width: 360, height: 180 },
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('class', 'mcr-curve');
  svg.setAttribute('viewBox', `0 0 ${size.width} ${size.height}`);
  svg.setAttribute('width', String(size.width));
  svg.setAttribute('height', String(size.height));

  const xMax = xs[xs.length - 1] || 1;
  const yMax = Math.max(0.5, ...ys);
  const points = xs
    .map((x, i) => `${(x / xMax) * size.width},${size.height - (ys[i] / yMax) * size.height}`)
    .join(' ');
  const line = document.createElementNS(SVG_NS, 'polyline');
  line.setAttribute('points', points);
  line.setAttribute('fill', 'none');
  line.setAttribute('class', 'mcr-line');
  svg.appendChild(line);

  const caption = document.createElementNS(SVG_NS, 'text');
  caption.setAttribute('x', '8');
  caption.setAttribute('y', '16');
  caption.setAttribute('class', 'curve-label');
  caption.textContent = label;
  svg.appendChild(caption);

  container.appendChild(svg);
  return svg;
}
