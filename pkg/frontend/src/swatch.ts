// Traffic-light swatches.  The color on screen is always the service-reported
// color field, never re-derived from scores on the client.

import type { ComponentReport } from "./types.js";

export const COMPONENT_TITLES: Record<string, string> = {
  c1: "Diversity",
  c2: "Phrasing variety",
  c3: "Lexical overlap",
  c4: "Field overlap leak",
  c5: "Semantic leak",
  c6: "Give-away wording",
  c7: "Split leakage",
};

export function renderSwatch(
  doc: Document,
  name: string,
  report: ComponentReport,
  onFix?: (detail: string) => void,
): HTMLElement {
  const el = doc.createElement("div");
  el.className = `swatch swatch-${report.color}`;
  el.dataset.component = name;
  el.dataset.color = report.color;

  const head = doc.createElement("div");
  head.className = "swatch-head";
  const title = doc.createElement("span");
  title.className = "swatch-title";
  title.textContent = COMPONENT_TITLES[name] ?? name;
  const badge = doc.createElement("span");
  badge.className = "swatch-badge";
  badge.textContent = report.color.toUpperCase(); // text label, not color only
  head.append(title, badge);
  el.append(head);

  const feedback = doc.createElement("p");
  feedback.className = "swatch-feedback";
  feedback.textContent = report.feedback;
  el.append(feedback);

  for (const rec of report.recommendations) {
    const chip = doc.createElement("button");
    chip.type = "button";
    chip.className = "rec-chip";
    chip.dataset.kind = rec.kind;
    chip.textContent = rec.detail;
    if (onFix) chip.addEventListener("click", () => onFix(rec.detail));
    el.append(chip);
  }
  return el;
}

// Pulls the thing a recommendation points at (a 'quoted token' or a sample
// id) so the editor can highlight it.
export function offendingFeature(detail: string): string | null {
  const quoted = detail.match(/'([^']+)'/);
  if (quoted) return quoted[1];
  const sample = detail.match(/sample (\S+)/);
  if (sample) return sample[1];
  return null;
}
