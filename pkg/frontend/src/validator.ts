// Validator workflow: walk the submitted queue, accept with one click,
// reject only with written feedback.  An empty-feedback reject never leaves
// the client; a 422 from the service reopens the feedback box.

import { ApiClient, ApiError } from "./api.js";
import { makeSparklinePoints, trajectoryValues } from "./sparkline.js";
import { renderSwatch } from "./swatch.js";
import type { DatasetStats, Granularity, QueueItem } from "./types.js";

export class ValidatorState {
  queue: QueueItem[] = [];
  stats: DatasetStats | null = null;
  granularity: Granularity = "component";
  feedback: Record<string, string> = {};
  feedbackRequired: Record<string, boolean> = {};

  constructor(private api: ApiClient, public validatorId: string) {}

  async refresh(): Promise<void> {
    this.queue = await this.api.getQueue(this.granularity);
    this.stats = await this.api.getStats();
  }

  async toggleGranularity(): Promise<void> {
    this.granularity = this.granularity === "component" ? "term" : "component";
    this.queue = await this.api.getQueue(this.granularity);
  }

  async accept(sampleId: string): Promise<void> {
    await this.api.decide(sampleId, "accept", this.feedback[sampleId] ?? "",
                          this.validatorId);
    this.queue = this.queue.filter((q) => q.sample_id !== sampleId);
    this.stats = await this.api.getStats();
  }

  /** Returns true when the rejection was sent; false when blocked client-side. */
  async reject(sampleId: string): Promise<boolean> {
    const text = (this.feedback[sampleId] ?? "").trim();
    if (!text) {
      this.feedbackRequired[sampleId] = true;
      return false; // compulsory feedback: no request is issued
    }
    try {
      await this.api.decide(sampleId, "reject", text, this.validatorId);
    } catch (e) {
      if (e instanceof ApiError && e.status === 422) {
        this.feedbackRequired[sampleId] = true;
        return false;
      }
      throw e;
    }
    this.queue = this.queue.filter((q) => q.sample_id !== sampleId);
    this.stats = await this.api.getStats();
    return true;
  }
}

export function renderValidator(doc: Document, root: HTMLElement,
                                state: ValidatorState, rerender: () => void): void {
  root.textContent = "";

  const bar = doc.createElement("div");
  bar.className = "validator-bar";
  const toggle = doc.createElement("button");
  toggle.type = "button";
  toggle.id = "granularity-toggle";
  toggle.textContent = `granularity: ${state.granularity}`;
  toggle.addEventListener("click", () => state.toggleGranularity().then(rerender));
  bar.append(toggle);

  if (state.stats) {
    const spark = doc.createElementNS("http://www.w3.org/2000/svg", "svg");
    spark.setAttribute("id", "stats-sparkline");
    spark.setAttribute("viewBox", "0 0 120 28");
    const line = doc.createElementNS("http://www.w3.org/2000/svg", "polyline");
    const values = trajectoryValues(state.stats.trajectory);
    line.setAttribute("points", makeSparklinePoints(values, 120, 28));
    line.setAttribute("data-points", String(values.length));
    spark.append(line);
    const label = doc.createElement("span");
    label.id = "stats-size";
    label.textContent = `dataset size ${state.stats.size}, `
      + `acceptance ${(100 * state.stats.acceptance_rate).toFixed(0)}%`;
    bar.append(spark, label);
  }
  root.append(bar);

  const list = doc.createElement("div");
  list.id = "queue";
  for (const item of state.queue) {
    list.append(renderQueueItem(doc, item, state, rerender));
  }
  root.append(list);
}

function renderQueueItem(doc: Document, item: QueueItem, state: ValidatorState,
                         rerender: () => void): HTMLElement {
  const card = doc.createElement("div");
  card.className = "queue-item";
  card.dataset.sampleId = item.sample_id;

  const text = doc.createElement("dl");
  for (const [field, value] of Object.entries(item.sample.fields)) {
    const dt = doc.createElement("dt");
    dt.textContent = field;
    const dd = doc.createElement("dd");
    dd.textContent = value;
    text.append(dt, dd);
  }
  const lab = doc.createElement("dt");
  lab.textContent = "label";
  const labv = doc.createElement("dd");
  labv.textContent = item.sample.label;
  text.append(lab, labv);
  card.append(text);

  const swatches = doc.createElement("div");
  swatches.className = "swatch-row";
  for (const name of Object.keys(item.report.components).sort()) {
    swatches.append(renderSwatch(doc, name, item.report.components[name]));
  }
  card.append(swatches);

  if (state.granularity === "term" && item.report.terms) {
    const bars = doc.createElement("ul");
    bars.className = "term-bars";
    for (const [token, pmi] of item.report.terms.token_pmi.slice(0, 8)) {
      const li = doc.createElement("li");
      li.textContent = `${token}: ${pmi.toFixed(2)}`;
      const bar = doc.createElement("span");
      bar.className = "term-bar";
      bar.style.width = `${Math.min(100, Math.max(0, pmi * 40))}px`;
      li.append(bar);
      bars.append(li);
    }
    card.append(bars);
  }

  const fbWrap = doc.createElement("div");
  fbWrap.className = "feedback-wrap"
    + (state.feedbackRequired[item.sample_id] ? " feedback-required" : "");
  const fb = doc.createElement("textarea");
  fb.className = "feedback-input";
  fb.placeholder = "feedback (required to reject)";
  fb.value = state.feedback[item.sample_id] ?? "";
  fb.addEventListener("input", () => {
    state.feedback[item.sample_id] = fb.value;
    state.feedbackRequired[item.sample_id] = false;
  });
  fbWrap.append(fb);
  if (state.feedbackRequired[item.sample_id]) {
    const warn = doc.createElement("p");
    warn.className = "feedback-warning";
    warn.textContent = "feedback is required to reject";
    fbWrap.append(warn);
  }
  card.append(fbWrap);

  const actions = doc.createElement("div");
  actions.className = "actions";
  const acceptBtn = doc.createElement("button");
  acceptBtn.type = "button";
  acceptBtn.className = "accept-btn";
  acceptBtn.textContent = "Accept";
  acceptBtn.addEventListener("click", () =>
    state.accept(item.sample_id).then(rerender));
  const rejectBtn = doc.createElement("button");
  rejectBtn.type = "button";
  rejectBtn.className = "reject-btn";
  rejectBtn.textContent = "Reject";
  rejectBtn.addEventListener("click", () =>
    state.reject(item.sample_id).then(rerender));
  actions.append(acceptBtn, rejectBtn);
  card.append(actions);
  return card;
}
