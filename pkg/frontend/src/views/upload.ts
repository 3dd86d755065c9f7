import { api } from "../api.js";
import { notify } from "../notices.js";
import { JobPoller } from "../polling.js";

/** Upload form: exactly one of media/transcript, then poll the queued job. */
export class UploadView {
  constructor(private root: HTMLElement, private poller: JobPoller,
              private onChange: () => void) {
    this.render();
  }

  private render(): void {
    this.root.replaceChildren();
    const form = document.createElement("form");
    form.innerHTML = `
      <h2>Upload a lecture</h2>
      <label>title <input name="title" required></label>
      <label>lecture id (optional) <input name="lecture_id"></label>
      <label>media file <input type="file" name="media"
             accept=".wav,.mp3,.m4a,.mp4,.mkv,.webm"></label>
      <label>or transcript document <input type="file" name="transcript"
             accept=".json"></label>
      <button type="submit">upload</button>
      <p class="job-status" hidden></p>
    `;
    const status = form.querySelector(".job-status") as HTMLElement;

    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const media = data.get("media") as File | null;
      const transcript = data.get("transcript") as File | null;
      if (!media?.size === !transcript?.size) {
        notify(new Error("choose exactly one of media or transcript"));
        return;
      }
      if (!media?.size) data.delete("media");
      if (!transcript?.size) data.delete("transcript");
      if (!(data.get("lecture_id") as string)) data.delete("lecture_id");
      try {
        const result = await api.uploadLecture(data);
        status.hidden = false;
        if (result.job_id) {
          status.textContent =
            `queued transcription job ${result.job_id} for ` +
            `${result.lecture.lecture_id}`;
          this.poller.watch(result.job_id);
        } else {
          status.textContent =
            `${result.lecture.lecture_id} uploaded (${result.lecture.status})`;
        }
        this.onChange();
      } catch (error) {
        notify(error, () => form.requestSubmit());
      }
    });
    this.root.appendChild(form);
  }
}
