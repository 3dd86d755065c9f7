import { api } from "../api.js";
import { notify } from "../notices.js";
import { JobPoller } from "../polling.js";
import { state } from "../state.js";

/** Lecture list with per-row analyze buttons and selection. */
export class LectureListView {
  private busy = false;

  constructor(private root: HTMLElement, private poller: JobPoller,
              private onSelect: () => void) {}

  async load(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const lectures = await api.listLectures();
      const models = await api.listModels();
      this.root.replaceChildren();
      const heading = document.createElement("h2");
      heading.textContent = "Lectures";
      this.root.appendChild(heading);

      const picker = document.createElement("label");
      picker.textContent = "model: ";
      const select = document.createElement("select");
      for (const model of models) {
        const option = document.createElement("option");
        option.value = model.model_id;
        option.textContent = `${model.model_id} (${model.task})`;
        option.selected = model.model_id === state.selectedModel;
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        state.selectedModel = select.value;
      });
      picker.appendChild(select);
      this.root.appendChild(picker);

      if (lectures.length === 0) {
        const empty = document.createElement("p");
        empty.className = "empty-state";
        empty.textContent = "no lectures uploaded yet";
        this.root.appendChild(empty);
        return;
      }
      const table = document.createElement("table");
      const head = table.createTHead().insertRow();
      for (const column of ["lecture", "title", "status", "duration", ""]) {
        const th = document.createElement("th");
        th.textContent = column;
        head.appendChild(th);
      }
      const body = table.createTBody();
      for (const lecture of lectures) {
        const tr = body.insertRow();
        const link = document.createElement("a");
        link.href = "#analysis";
        link.textContent = lecture.lecture_id;
        link.addEventListener("click", () => {
          state.selectedLecture = lecture.lecture_id;
          this.onSelect();
        });
        tr.insertCell().appendChild(link);
        tr.insertCell().textContent = lecture.title;
        tr.insertCell().textContent = lecture.status;
        tr.insertCell().textContent =
          lecture.duration !== null ? `${lecture.duration}s` : "-";
        const actions = tr.insertCell();
        if (lecture.status === "transcribed" || lecture.status === "analyzed") {
          const analyze = document.createElement("button");
          analyze.textContent = "analyze";
          analyze.addEventListener("click", async () => {
            try {
              const job = await api.analyze(lecture.lecture_id,
                                            state.selectedModel);
              this.poller.watch(job.job_id);
            } catch (error) {
              notify(error);
            }
          });
          actions.appendChild(analyze);
        }
      }
      this.root.appendChild(table);
    } catch (error) {
      notify(error, () => void this.load());
    } finally {
      this.busy = false;
    }
  }
}
