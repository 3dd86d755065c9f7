/** Shared view state; the feature dropdown is always derived from the
 * currently loaded summary's positive-count features. */
export interface ViewState {
  selectedLecture: string | null;
  selectedModel: string;
  selectedFeature: string | null;
  sourceToggle: "model" | "gold";
}

export const state: ViewState = {
  selectedLecture: null,
  selectedModel: "text_features_v1",
  selectedFeature: null,
  sourceToggle: "model",
};

/** Features eligible for the dropdown: count > 0, stable order. */
export function positiveCountFeatures(counts: Record<string, number>): string[] {
  return Object.keys(counts).filter((fid) => counts[fid] > 0).sort();
}
