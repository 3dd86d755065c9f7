import { api } from "../api.js";
import { displayName } from "../format.js";
import { notify } from "../notices.js";

/**
 * Cross-lecture trends: counts and per-hour rates per feature over the
 * lectures picked, values verbatim from the payload.
 */
export class TrendsView {
  private busy = false;
  private chosen: string[] = [];

  constructor(private root: HTMLElement) {}

  async load(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const lectures = await api.listLectures();
      this.root.replaceChildren();
      const heading = document.createElement("h2");
      heading.textContent = "Trends across lectures";
      this.root.appendChild(heading);

      const picker = document.createElement("div");
      picker.className = "trend-picker";
      for (const lecture of lectures) {
        const label = document.createElement("label");
        const box = document.createElement("input");
        box.type = "checkbox";
        box.value = lecture.lecture_id;
        box.checked = this.chosen.includes(lecture.lecture_id);
        box.addEventListener("change", () => {
          this.chosen = box.checked
            ? [...this.chosen, lecture.lecture_id]
            : this.chosen.filter((id) => id !== lecture.lecture_id);
        });
        label.appendChild(box);
        label.append(` ${lecture.lecture_id}`);
        picker.appendChild(label);
      }
      const go = document.createElement("button");
      go.textContent = "show trends";
      go.addEventListener("click", () => void this.show());
      picker.appendChild(go);
      this.root.appendChild(picker);
      this.root.appendChild(document.createElement("div")).id = "trend-result";
    } catch (error) {
      notify(error, () => void this.load());
    } finally {
      this.busy = false;
    }
  }

  private async show(): Promise<void> {
    const target = this.root.querySelector("#trend-result") as HTMLElement;
    if (this.chosen.length === 0) {
      target.textContent = "pick at least one lecture";
      return;
    }
    try {
      const trends = await api.getTrends(this.chosen);
      target.replaceChildren();
      const table = document.createElement("table");
      const head = table.createTHead().insertRow();
      const first = document.createElement("th");
      first.textContent = "feature";
      head.appendChild(first);
      for (const lecture of trends.lectures) {
        const th = document.createElement("th");
        th.textContent = `${lecture} (count / per hour)`;
        head.appendChild(th);
      }
      const body = table.createTBody();
      for (const fid of Object.keys(trends.per_feature).sort()) {
        const tr = body.insertRow();
        tr.insertCell().textContent = displayName(fid);
        for (const [count, rate] of trends.per_feature[fid]) {
          const cell = tr.insertCell();
          cell.textContent = `${count} / ${rate}`;
          cell.setAttribute("data-count", String(count));
          cell.setAttribute("data-rate", String(rate));
        }
      }
      target.appendChild(table);
    } catch (error) {
      notify(error, () => void this.show());
    }
  }
}
