import { SummaryPayload, TimelineEntry } from "./api.js";
import { displayName } from "./format.js";

/**
 * SVG renderers whose geometry attributes ARE the payload values: bar
 * heights equal counts and timeline x-coordinates equal minutes, in user
 * units, with the viewBox doing all visual scaling. Snapshot tests read the
 * values straight out of the DOM.
 */

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement(width: number, height: number, viewBox: string): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", viewBox);
  svg.setAttribute("preserveAspectRatio", "none");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  return svg;
}

/** Bar chart of occurrence counts; one rect per feature with count > 0. */
export function renderCountsBarChart(summary: SummaryPayload): HTMLElement {
  const wrapper = document.createElement("figure");
  wrapper.className = "chart counts-chart";
  const features = Object.keys(summary.counts)
    .filter((fid) => summary.counts[fid] > 0)
    .sort();
  if (features.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no occurrences detected in this lecture";
    wrapper.appendChild(empty);
    return wrapper;
  }

  const maxCount = Math.max(...features.map((fid) => summary.counts[fid]));
  const svg = svgElement(520, 220, `0 0 ${features.length} ${maxCount}`);
  svg.classList.add("bars");
  features.forEach((fid, column) => {
    const count = summary.counts[fid];
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(column + 0.15));
    rect.setAttribute("width", "0.7");
    rect.setAttribute("y", String(maxCount - count));
    rect.setAttribute("height", String(count));
    rect.setAttribute("data-feature", fid);
    rect.setAttribute("data-value", String(count));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${displayName(fid)}: ${count}`;
    rect.appendChild(title);
    svg.appendChild(rect);
  });
  wrapper.appendChild(svg);

  const legend = document.createElement("figcaption");
  legend.className = "bar-labels";
  for (const fid of features) {
    const label = document.createElement("span");
    label.textContent = `${displayName(fid)} (${summary.counts[fid]})`;
    label.setAttribute("data-feature", fid);
    legend.appendChild(label);
  }
  wrapper.appendChild(legend);
  return wrapper;
}

/**
 * Timeline scatter: x in minutes (payload values verbatim), one row per
 * feature, one mark per entry; state occurrences extend a line to their end.
 */
export function renderTimelineScatter(entries: TimelineEntry[]): HTMLElement {
  const wrapper = document.createElement("figure");
  wrapper.className = "chart timeline-chart";
  if (entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no occurrences on the timeline";
    wrapper.appendChild(empty);
    return wrapper;
  }

  const features = [...new Set(entries.map((e) => e.feature_id))].sort();
  const rows = new Map(features.map((fid, i) => [fid, i]));
  const maxMinute = Math.max(
    ...entries.map((e) => (e.end !== null ? e.end : e.start)), 1);

  const svg = svgElement(640, 40 * features.length,
    `0 0 ${maxMinute} ${features.length}`);
  svg.classList.add("scatter");
  for (const entry of entries) {
    const row = rows.get(entry.feature_id)!;
    if (entry.end !== null) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(entry.start));
      line.setAttribute("x2", String(entry.end));
      line.setAttribute("y1", String(row + 0.5));
      line.setAttribute("y2", String(row + 0.5));
      line.setAttribute("data-feature", entry.feature_id);
      svg.appendChild(line);
    }
    const mark = document.createElementNS(SVG_NS, "circle");
    mark.setAttribute("cx", String(entry.start));
    mark.setAttribute("cy", String(row + 0.5));
    mark.setAttribute("r", "0.12");
    mark.setAttribute("data-feature", entry.feature_id);
    mark.setAttribute("data-x", String(entry.start));
    if (entry.end !== null) {
      mark.setAttribute("data-end", String(entry.end));
    }
    svg.appendChild(mark);
  }
  wrapper.appendChild(svg);

  const legend = document.createElement("figcaption");
  legend.className = "row-labels";
  for (const fid of features) {
    const label = document.createElement("span");
    label.textContent = displayName(fid);
    label.setAttribute("data-feature", fid);
    legend.appendChild(label);
  }
  wrapper.appendChild(legend);

  const axis = document.createElement("p");
  axis.className = "axis-note";
  axis.textContent = `x: time in minutes (0 to ${maxMinute})`;
  wrapper.appendChild(axis);
  return wrapper;
}
