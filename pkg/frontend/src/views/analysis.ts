import { api } from "../api.js";
import { renderCountsBarChart, renderTimelineScatter } from "../charts.js";
import { displayName } from "../format.js";
import { notify } from "../notices.js";
import { positiveCountFeatures, state } from "../state.js";
import { renderFeatureTable } from "./featureTable.js";

/**
 * Per-lecture analysis: counts bar chart, timeline scatter, feature
 * dropdown (positive-count features only), and the sentence table for the
 * selected feature. One in-flight load at a time.
 */
export class AnalysisView {
  private busy = false;

  constructor(private root: HTMLElement) {}

  async load(): Promise<void> {
    if (this.busy || !state.selectedLecture) return;
    this.busy = true;
    const lecture = state.selectedLecture;
    try {
      const model = state.sourceToggle === "model" ? state.selectedModel : undefined;
      const summary = await api.getSummary(lecture, state.sourceToggle, model);
      const timeline = await api.getTimeline(lecture, state.sourceToggle, model);

      this.root.replaceChildren();
      const heading = document.createElement("h2");
      heading.textContent = `Analysis: ${lecture} (${summary.source}` +
        (summary.model_id ? `, ${summary.model_id})` : ")");
      this.root.appendChild(heading);

      this.root.appendChild(this.sourceToggle());
      this.root.appendChild(renderCountsBarChart(summary));
      this.root.appendChild(renderTimelineScatter(timeline));

      const features = positiveCountFeatures(summary.counts);
      if (state.selectedFeature && !features.includes(state.selectedFeature)) {
        state.selectedFeature = null;
      }
      this.root.appendChild(this.featureDropdown(features));

      if (state.selectedFeature) {
        const rows = await api.getSentences(lecture, state.selectedFeature, model);
        this.root.appendChild(
          renderFeatureTable(state.selectedFeature, rows, lecture));
      }
    } catch (error) {
      notify(error, () => void this.load());
    } finally {
      this.busy = false;
    }
  }

  private sourceToggle(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "source-toggle";
    for (const source of ["model", "gold"] as const) {
      const button = document.createElement("button");
      button.textContent = source;
      button.disabled = state.sourceToggle === source;
      button.addEventListener("click", () => {
        state.sourceToggle = source;
        void this.load();
      });
      wrap.appendChild(button);
    }
    return wrap;
  }

  private featureDropdown(features: string[]): HTMLElement {
    const wrap = document.createElement("label");
    wrap.className = "feature-picker";
    wrap.textContent = "feature: ";
    const select = document.createElement("select");
    select.id = "feature-dropdown";
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "choose a recognized feature";
    select.appendChild(placeholder);
    for (const fid of features) {
      const option = document.createElement("option");
      option.value = fid;
      option.textContent = displayName(fid);
      option.selected = fid === state.selectedFeature;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      state.selectedFeature = select.value || null;
      void this.load();
    });
    wrap.appendChild(select);
    return wrap;
  }
}
