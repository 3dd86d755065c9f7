import { SentenceRow, transcriptUrl } from "../api.js";
import { displayName } from "../format.js";

/**
 * Table of sentences where the selected feature was predicted. Values come
 * straight from the payload; the clock column is presentation only and the
 * raw seconds ride along in data attributes. An empty payload renders an
 * explicit empty state, never a blank region.
 */
export function renderFeatureTable(featureId: string, rows: SentenceRow[],
                                   lectureId: string): HTMLElement {
  const section = document.createElement("section");
  section.className = "feature-table";

  const heading = document.createElement("h3");
  heading.textContent = `Sentences: ${displayName(featureId)}`;
  section.appendChild(heading);

  if (rows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no occurrences of this feature were predicted";
    section.appendChild(empty);
  } else {
    const table = document.createElement("table");
    const head = table.createTHead().insertRow();
    for (const column of ["text", "start", "end"]) {
      const th = document.createElement("th");
      th.textContent = column;
      head.appendChild(th);
    }
    const body = table.createTBody();
    for (const row of rows) {
      const tr = body.insertRow();
      tr.insertCell().textContent = row.text;
      const startCell = tr.insertCell();
      startCell.textContent = String(row.start);
      startCell.setAttribute("data-seconds", String(row.start));
      const endCell = tr.insertCell();
      endCell.textContent = String(row.end);
      endCell.setAttribute("data-seconds", String(row.end));
    }
    section.appendChild(table);
  }

  const download = document.createElement("a");
  download.href = transcriptUrl(lectureId);
  download.textContent = "download transcript";
  download.setAttribute("download", `${lectureId}-transcript.json`);
  section.appendChild(download);
  return section;
}
