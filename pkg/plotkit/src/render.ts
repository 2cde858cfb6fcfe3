/**
 * Deterministic SVG rendering of the rapid-entanglement comparison figure:
 * mean correlation R2^2 against dimensionless time for the feedback and
 * no-feedback ensembles, each with a shaded standard-error band, plus a
 * purity inset.  Output bytes are a pure function of the two bundles and
 * the pinned style below.
 */

import { writeFileSync } from "node:fs";

import type { CurveBundle } from "./csv.js";

// Pinned style.
const STYLE = {
  width: 720,
  height: 540,
  margin: { top: 36, right: 24, bottom: 56, left: 64 },
  inset: { left: 420, top: 300, width: 240, height: 170 },
  feedbackColor: "#1f77b4",
  nofeedbackColor: "#d62728",
  bandOpacity: 0.18,
  axisColor: "#333333",
  gridColor: "#dddddd",
  font: "13px sans-serif",
  rMax: 3.1,
  purityRange: [0.4, 1.02] as const,
};

export class RenderError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "RenderError";
  }
}

interface Scale {
  (value: number): number;
}

function linear(domain: readonly [number, number], range: readonly [number, number]): Scale {
  const k = (range[1] - range[0]) / (domain[1] - domain[0]);
  return (v: number) => range[0] + (v - domain[0]) * k;
}

const fmt = (v: number): string => v.toFixed(2);

function polyline(tau: number[], values: number[], x: Scale, y: Scale): string {
  return tau.map((t, i) => `${fmt(x(t))},${fmt(y(values[i]))}`).join(" ");
}

function bandPolygon(tau: number[], mean: number[], se: number[], x: Scale, y: Scale): string {
  const upper = tau.map((t, i) => `${fmt(x(t))},${fmt(y(mean[i] + se[i]))}`);
  const lower = tau
    .map((t, i) => `${fmt(x(t))},${fmt(y(mean[i] - se[i]))}`)
    .reverse();
  return [...upper, ...lower].join(" ");
}

function ticks(lo: number, hi: number, step: number): number[] {
  const out: number[] = [];
  for (let v = lo; v <= hi + 1e-9; v += step) out.push(Number(v.toFixed(10)));
  return out;
}

function checkInputs(feedback: CurveBundle, nofeedback: CurveBundle): void {
  if (feedback.tau.length === 0 || nofeedback.tau.length === 0) {
    throw new RenderError("cannot render empty bundles");
  }
  if (feedback.tau.length !== nofeedback.tau.length) {
    throw new RenderError(
      `tau grids differ: ${feedback.tau.length} vs ${nofeedback.tau.length} bins`,
    );
  }
  for (let i = 0; i < feedback.tau.length; i++) {
    if (feedback.tau[i] !== nofeedback.tau[i]) {
      throw new RenderError(`tau grids differ at bin ${i}`);
    }
  }
}

/** Build the figure as an SVG document string. */
export function renderFig1(feedback: CurveBundle, nofeedback: CurveBundle): string {
  checkInputs(feedback, nofeedback);
  const { width, height, margin, inset } = STYLE;
  const tauMax = feedback.tau[feedback.tau.length - 1];
  const x = linear([0, tauMax], [margin.left, width - margin.right]);
  const y = linear([0, STYLE.rMax], [height - margin.bottom, margin.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  // Main axes grid and ticks.
  for (const tick of ticks(0, 3, 1)) {
    const py = fmt(y(tick));
    parts.push(
      `<line x1="${fmt(x(0))}" y1="${py}" x2="${fmt(x(tauMax))}" y2="${py}" stroke="${STYLE.gridColor}"/>`,
    );
    parts.push(
      `<text x="${fmt(x(0) - 10)}" y="${py}" text-anchor="end" dominant-baseline="middle" style="font: ${STYLE.font}">${tick}</text>`,
    );
  }
  const xStep = tauMax > 0.6 ? 0.2 : 0.1;
  for (const tick of ticks(0, tauMax, xStep)) {
    const px = fmt(x(tick));
    parts.push(
      `<line x1="${px}" y1="${fmt(y(0))}" x2="${px}" y2="${fmt(y(0) + 5)}" stroke="${STYLE.axisColor}"/>`,
    );
    parts.push(
      `<text x="${px}" y="${fmt(y(0) + 20)}" text-anchor="middle" style="font: ${STYLE.font}">${tick}</text>`,
    );
  }
  parts.push(
    `<line x1="${fmt(x(0))}" y1="${fmt(y(0))}" x2="${fmt(x(tauMax))}" y2="${fmt(y(0))}" stroke="${STYLE.axisColor}"/>`,
  );
  parts.push(
    `<line x1="${fmt(x(0))}" y1="${fmt(y(0))}" x2="${fmt(x(0))}" y2="${fmt(y(STYLE.rMax))}" stroke="${STYLE.axisColor}"/>`,
  );
  parts.push(
    `<text x="${fmt((x(0) + x(tauMax)) / 2)}" y="${height - 14}" text-anchor="middle" style="font: ${STYLE.font}">dimensionless time</text>`,
  );
  parts.push(
    `<text x="18" y="${fmt((y(0) + y(STYLE.rMax)) / 2)}" text-anchor="middle" style="font: ${STYLE.font}" transform="rotate(-90 18 ${fmt((y(0) + y(STYLE.rMax)) / 2)})">mean correlation R2&#178;</text>`,
  );

  // Error bands then curves, feedback on top.
  for (const [bundle, color] of [
    [nofeedback, STYLE.nofeedbackColor],
    [feedback, STYLE.feedbackColor],
  ] as const) {
    parts.push(
      `<polygon points="${bandPolygon(bundle.tau, bundle.mean.r2sq, bundle.stderr.r2sq, x, y)}" fill="${color}" fill-opacity="${STYLE.bandOpacity}" stroke="none"/>`,
    );
  }
  parts.push(
    `<polyline points="${polyline(nofeedback.tau, nofeedback.mean.r2sq, x, y)}" fill="none" stroke="${STYLE.nofeedbackColor}" stroke-width="1.8" class="curve-nofeedback"/>`,
  );
  parts.push(
    `<polyline points="${polyline(feedback.tau, feedback.mean.r2sq, x, y)}" fill="none" stroke="${STYLE.feedbackColor}" stroke-width="1.8" class="curve-feedback"/>`,
  );

  // Legend.
  const lx = margin.left + 16;
  parts.push(
    `<line x1="${lx}" y1="52" x2="${lx + 28}" y2="52" stroke="${STYLE.feedbackColor}" stroke-width="1.8"/>`,
    `<text x="${lx + 34}" y="56" style="font: ${STYLE.font}">${feedback.label}</text>`,
    `<line x1="${lx}" y1="72" x2="${lx + 28}" y2="72" stroke="${STYLE.nofeedbackColor}" stroke-width="1.8"/>`,
    `<text x="${lx + 34}" y="76" style="font: ${STYLE.font}">${nofeedback.label}</text>`,
  );

  // Purity inset.
  const ix = linear([0, tauMax], [inset.left, inset.left + inset.width]);
  const iy = linear(STYLE.purityRange, [inset.top + inset.height, inset.top]);
  parts.push(
    `<rect x="${inset.left}" y="${inset.top}" width="${inset.width}" height="${inset.height}" fill="white" stroke="${STYLE.axisColor}"/>`,
  );
  for (const tick of [0.5, 0.75, 1.0]) {
    parts.push(
      `<line x1="${inset.left}" y1="${fmt(iy(tick))}" x2="${inset.left + 6}" y2="${fmt(iy(tick))}" stroke="${STYLE.axisColor}"/>`,
      `<text x="${inset.left + 9}" y="${fmt(iy(tick))}" dominant-baseline="middle" style="font: 11px sans-serif">${tick}</text>`,
    );
  }
  parts.push(
    `<polyline points="${polyline(nofeedback.tau, nofeedback.mean.purity, ix, iy)}" fill="none" stroke="${STYLE.nofeedbackColor}" stroke-width="1.4" class="inset-nofeedback"/>`,
  );
  parts.push(
    `<polyline points="${polyline(feedback.tau, feedback.mean.purity, ix, iy)}" fill="none" stroke="${STYLE.feedbackColor}" stroke-width="1.4" class="inset-feedback"/>`,
  );
  parts.push(
    `<text x="${inset.left + inset.width / 2}" y="${inset.top + 16}" text-anchor="middle" style="font: 11px sans-serif">purity</text>`,
  );

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Validate, render, and only then write the image file. */
export function renderFig1ToFile(
  feedback: CurveBundle,
  nofeedback: CurveBundle,
  outPath: string,
): void {
  const svg = renderFig1(feedback, nofeedback);
  writeFileSync(outPath, svg, { encoding: "utf8" });
}
