/** Canvas scatter plot colored by cluster label. Noise (-1) renders gray. */

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
  "#2f4b7c", "#ffa600", "#665191", "#a05195", "#d45087",
];

export function colorFor(label: number): string {
  if (label < 0) return "#c8c8c8";
  return PALETTE[label % PALETTE.length]!;
}

export function drawScatter(
  canvas: HTMLCanvasElement,
  x: number[],
  y: number[],
  labels: number[] | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  if (x.length === 0) return;

  const pad = 12;
  const xMin = Math.min(...x);
  const xMax = Math.max(...x);
  const yMin = Math.min(...y);
  const yMax = Math.max(...y);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const radius = x.length > 5000 ? 1.2 : x.length > 1500 ? 2 : 3;

  for (let i = 0; i < x.length; i++) {
    const px = pad + ((x[i]! - xMin) / xSpan) * (w - 2 * pad);
    const py = h - pad - ((y[i]! - yMin) / ySpan) * (h - 2 * pad);
    ctx.fillStyle = labels ? colorFor(labels[i] ?? -1) : "#888888";
    ctx.beginPath();
    ctx.arc(px, py, radius, 0, 2 * Math.PI);
    ctx.fill();
  }
}
