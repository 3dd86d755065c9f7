/** Human label for a feature id ("asking_questions" -> "Asking questions"). */
export function displayName(featureId: string): string {
  const words = featureId.replace(/^ext_/, "").split("_").join(" ");
  return words.charAt(0).toUpperCase() + words.slice(1);
}

/** Seconds -> "m:ss.s" for table cells; values themselves stay untouched. */
export function clock(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = (seconds - m * 60).toFixed(1).padStart(4, "0");
  return `${m}:${s}`;
}
