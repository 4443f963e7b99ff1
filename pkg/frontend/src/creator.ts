// Creator workflow: draft, read the feedback, then revise, fix via a
// recommendation, discard, or submit.  Submission and decisions are always
// confirmed by server responses; only discard is optimistic.

import { ApiClient } from "./api.js";
import { offendingFeature, renderSwatch } from "./swatch.js";
import type { DraftRecord } from "./types.js";

export type CreatorPhase = "editing" | "scored" | "submitted" | "decided";

export class CreatorState {
  phase: CreatorPhase = "editing";
  fields: Record<string, string> = {};
  label = "";
  draft: DraftRecord | null = null;
  sampleId: string | null = null;
  decisionFeedback: string | null = null;
  highlight: string | null = null;
  lastError: string | null = null;

  constructor(
    private api: ApiClient,
    public fieldNames: string[],
    public labels: string[],
  ) {
    for (const f of fieldNames) this.fields[f] = "";
    this.label = labels[0] ?? "";
  }

  formComplete(): boolean {
    return this.fieldNames.every((f) => (this.fields[f] ?? "").trim() !== "")
      && this.label !== "";
  }

  canSave(): boolean {
    return this.phase === "editing" && this.formComplete();
  }

  canSubmit(): boolean {
    return this.phase === "scored" && this.draft !== null;
  }

  async save(): Promise<void> {
    if (!this.formComplete()) return;
    this.lastError = null;
    try {
      this.draft = await this.api.postDraft(this.fields, this.label);
      this.phase = "scored";
    } catch (e) {
      this.lastError = e instanceof Error ? e.message : String(e);
    }
  }

  revise(): void {
    if (this.phase !== "scored") return;
    this.phase = "editing"; // keep the text, drop the stale score
    this.highlight = null;
  }

  fix(detail: string): void {
    if (this.phase !== "scored") return;
    this.highlight = offendingFeature(detail);
    this.phase = "editing";
  }

  async discard(): Promise<void> {
    const draft = this.draft;
    this.reset(); // optimistic: clear the editor immediately
    if (draft) {
      try {
        await this.api.discardDraft(draft.draft_id);
      } catch {
        // the draft stays server-side; a fresh editor is still correct
      }
    }
  }

  async submit(): Promise<void> {
    if (!this.canSubmit() || !this.draft) return;
    const res = await this.api.submitDraft(this.draft.draft_id);
    this.sampleId = res.sample_id;
    this.phase = "submitted";
  }

  async pollDecision(): Promise<void> {
    if (this.phase !== "submitted" || !this.sampleId) return;
    const rec = await this.api.getSample(this.sampleId);
    if (rec.decision) {
      this.phase = "decided";
      this.decisionFeedback = rec.decision.feedback;
      this.draft = rec;
    }
  }

  reset(): void {
    this.phase = "editing";
    for (const f of this.fieldNames) this.fields[f] = "";
    this.draft = null;
    this.sampleId = null;
    this.decisionFeedback = null;
    this.highlight = null;
  }
}

export function renderCreator(doc: Document, root: HTMLElement, state: CreatorState,
                              rerender: () => void): void {
  root.textContent = "";

  const form = doc.createElement("form");
  form.className = "editor";
  form.addEventListener("submit", (e) => e.preventDefault());
  for (const f of state.fieldNames) {
    const wrap = doc.createElement("label");
    wrap.textContent = f;
    const area = doc.createElement("textarea");
    area.id = `field-${f}`;
    area.value = state.fields[f] ?? "";
    area.addEventListener("input", () => {
      state.fields[f] = area.value;
      if (state.phase === "scored") state.phase = "editing";
    });
    if (state.highlight && (state.fields[f] ?? "").includes(state.highlight)) {
      area.classList.add("has-highlight");
    }
    wrap.append(area);
    form.append(wrap);
  }
  const labelSel = doc.createElement("select");
  labelSel.id = "label-select";
  for (const lab of state.labels) {
    const opt = doc.createElement("option");
    opt.value = lab;
    opt.textContent = lab;
    opt.selected = lab === state.label;
    labelSel.append(opt);
  }
  labelSel.addEventListener("change", () => {
    state.label = labelSel.value;
  });
  form.append(labelSel);
  root.append(form);

  if (state.highlight) {
    const note = doc.createElement("p");
    note.className = "highlight-note";
    note.textContent = `flagged: ${state.highlight}`;
    root.append(note);
  }

  const actions = doc.createElement("div");
  actions.className = "actions";
  const saveBtn = button(doc, "save-btn", "Check quality", () =>
    state.save().then(rerender));
  saveBtn.disabled = !state.canSave();
  const reviseBtn = button(doc, "revise-btn", "Revise", () => {
    state.revise();
    rerender();
  });
  reviseBtn.disabled = state.phase !== "scored";
  const discardBtn = button(doc, "discard-btn", "Discard", () =>
    state.discard().then(rerender));
  const submitBtn = button(doc, "submit-btn", "Submit", () =>
    state.submit().then(rerender));
  submitBtn.disabled = !state.canSubmit();
  actions.append(saveBtn, reviseBtn, discardBtn, submitBtn);
  root.append(actions);

  if (state.lastError) {
    const err = doc.createElement("p");
    err.className = "error-banner";
    err.textContent = state.lastError;
    root.append(err);
  }

  if (state.draft && state.phase !== "editing") {
    const swatches = doc.createElement("div");
    swatches.id = "swatches";
    const components = state.draft.report.components;
    for (const name of Object.keys(components).sort()) {
      swatches.append(renderSwatch(doc, name, components[name], (detail) => {
        state.fix(detail);
        rerender();
      }));
    }
    root.append(swatches);
  }

  if (state.phase === "submitted") {
    const waiting = doc.createElement("p");
    waiting.id = "await-decision";
    waiting.textContent = `submitted as ${state.sampleId}; awaiting validation`;
    root.append(waiting);
  }
  if (state.phase === "decided" && state.draft?.decision) {
    const box = doc.createElement("div");
    box.id = "decision-box";
    box.className = `decision-${state.draft.decision.verdict}`;
    const verdict = doc.createElement("strong");
    verdict.textContent = state.draft.status;
    const fb = doc.createElement("p");
    fb.id = "decision-feedback";
    fb.textContent = state.decisionFeedback ?? "";
    box.append(verdict, fb);
    root.append(box);
  }
}

function button(doc: Document, id: string, text: string,
                onClick: () => unknown): HTMLButtonElement {
  const b = doc.createElement("button");
  b.type = "button";
  b.id = id;
  b.textContent = text;
  b.addEventListener("click", onClick);
  return b;
}
