// Minimal SVG plotting: line overlays with optional bands, and a P-P
// scatter against the diagonal. No dependencies, fixed virtual viewport.

export interface Series {
  label: string;
  color: string;
  points: [number, number][];           // (k, value), gaps removed by caller
  band?: [number, number, number][];    // (k, lo, hi)
}

const W = 640;
const H = 360;
const PAD = 42;

const SVG_NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function scaler([lo, hi]: [number, number], out0: number, out1: number) {
  return (v: number) => out0 + ((v - lo) / (hi - lo)) * (out1 - out0);
}

export function clearSvg(svg: SVGSVGElement): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
}

function axes(svg: SVGSVGElement, xDomain: [number, number], yDomain: [number, number]) {
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.appendChild(el("rect", { x: "0", y: "0", width: String(W), height: String(H),
                               fill: "white" }));
  svg.appendChild(el("line", { x1: String(PAD), y1: String(H - PAD), x2: String(W - 8),
                               y2: String(H - PAD), stroke: "#444" }));
  svg.appendChild(el("line", { x1: String(PAD), y1: "8", x2: String(PAD),
                               y2: String(H - PAD), stroke: "#444" }));
  for (const [domain, horizontal] of [[xDomain, true], [yDomain, false]] as const) {
    for (let i = 0; i <= 4; i++) {
      const v = domain[0] + (i / 4) * (domain[1] - domain[0]);
      const label = el("text", {
        "font-size": "11",
        fill: "#333",
        ...(horizontal
          ? { x: String(PAD + (i / 4) * (W - 8 - PAD)), y: String(H - PAD + 16),
              "text-anchor": "middle" }
          : { x: String(PAD - 6), y: String(H - PAD - (i / 4) * (H - PAD - 8) + 4),
              "text-anchor": "end" }),
      });
      label.textContent = Math.abs(v) >= 1000 ? v.toExponential(1) : v.toPrecision(3);
      svg.appendChild(label);
    }
  }
}

export function renderPathOverlay(svg: SVGSVGElement, series: Series[],
                                  referenceY: number | null = null): void {
  clearSvg(svg);
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => [
    ...s.points.map((p) => p[1]),
    ...(s.band ?? []).flatMap((b) => [b[1], b[2]]),
  ]);
  if (referenceY !== null) ys.push(referenceY);
  if (xs.length === 0) {
    axes(svg, [0, 1], [0, 1]);
    return;
  }
  const xDomain = extent(xs);
  const yDomain = extent(ys);
  axes(svg, xDomain, yDomain);
  const sx = scaler(xDomain, PAD, W - 8);
  const sy = scaler(yDomain, H - PAD, 8);

  if (referenceY !== null) {
    svg.appendChild(el("line", {
      x1: String(PAD), x2: String(W - 8),
      y1: String(sy(referenceY)), y2: String(sy(referenceY)),
      stroke: "#888", "stroke-dasharray": "6 3",
    }));
  }
  for (const s of series) {
    if (s.band && s.band.length > 1) {
      const upper = s.band.map(([k, , hi]) => `${sx(k)},${sy(hi)}`);
      const lower = [...s.band].reverse().map(([k, lo]) => `${sx(k)},${sy(lo)}`);
      const region = el("polygon", {
        points: [...upper, ...lower].join(" "),
        fill: s.color,
        opacity: "0.12",
        class: "ci-band",
      });
      svg.appendChild(region);
    }
    const line = el("polyline", {
      points: s.points.map(([k, v]) => `${sx(k)},${sy(v)}`).join(" "),
      fill: "none",
      stroke: s.color,
      "stroke-width": "1.6",
      class: "series",
      "data-label": s.label,
    });
    svg.appendChild(line);
  }
}

export function renderPpScatter(svg: SVGSVGElement, points: [number, number][]): void {
  clearSvg(svg);
  const all = points.flat();
  const domain = extent(all);
  axes(svg, domain, domain);
  const sx = scaler(domain, PAD, W - 8);
  const sy = scaler(domain, H - PAD, 8);
  svg.appendChild(el("line", {
    x1: String(sx(domain[0])), y1: String(sy(domain[0])),
    x2: String(sx(domain[1])), y2: String(sy(domain[1])),
    stroke: "#888", "stroke-dasharray": "5 4", class: "diagonal",
  }));
  for (const [x, y] of points) {
    svg.appendChild(el("circle", {
      cx: String(sx(x)), cy: String(sy(y)), r: "2",
      fill: "#1b6ca8", opacity: "0.65", class: "pp-point",
    }));
  }
}
