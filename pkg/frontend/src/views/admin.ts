import { api } from "../api.js";
import { notify } from "../notices.js";

/** Model registry administration; needs the admin bearer token. */
export class AdminModelsView {
  private busy = false;

  constructor(private root: HTMLElement) {}

  async load(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const models = await api.listModels();
      this.root.replaceChildren();
      const heading = document.createElement("h2");
      heading.textContent = "Models";
      this.root.appendChild(heading);

      const token = document.createElement("input");
      token.type = "password";
      token.placeholder = "admin token";
      token.id = "admin-token";
      this.root.appendChild(token);

      const table = document.createElement("table");
      const head = table.createTHead().insertRow();
      for (const column of ["model", "task", "backend", "labels", ""]) {
        const th = document.createElement("th");
        th.textContent = column;
        head.appendChild(th);
      }
      const body = table.createTBody();
      for (const model of models) {
        const tr = body.insertRow();
        tr.insertCell().textContent = model.model_id;
        tr.insertCell().textContent = model.task;
        tr.insertCell().textContent = model.backend;
        tr.insertCell().textContent = model.label_set.join(", ");
        const remove = document.createElement("button");
        remove.textContent = "delete";
        remove.addEventListener("click", async () => {
          try {
            await api.deleteModel(model.model_id, token.value);
            await this.reload();
          } catch (error) {
            notify(error);
          }
        });
        tr.insertCell().appendChild(remove);
      }
      this.root.appendChild(table);

      const form = document.createElement("form");
      form.innerHTML = `
        <h3>Register a remote model</h3>
        <label>model id <input name="model_id" required></label>
        <label>task
          <select name="task">
            <option value="feature_multilabel">feature_multilabel</option>
            <option value="question_binary">question_binary</option>
          </select>
        </label>
        <label>endpoint <input name="endpoint" required
               placeholder="http://models.internal/infer"></label>
        <label>labels (comma separated) <input name="labels" required></label>
        <button type="submit">register</button>
      `;
      form.addEventListener("submit", async (event) => {
        event.preventDefault();
        const data = new FormData(form);
        try {
          await api.registerModel({
            model_id: data.get("model_id") as string,
            task: data.get("task") as string,
            backend: "remote",
            endpoint: data.get("endpoint") as string,
            label_set: (data.get("labels") as string)
              .split(",").map((s) => s.trim()).filter(Boolean),
          }, token.value);
          await this.reload();
        } catch (error) {
          notify(error);
        }
      });
      this.root.appendChild(form);
    } catch (error) {
      notify(error, () => void this.load());
    } finally {
      this.busy = false;
    }
  }

  private async reload(): Promise<void> {
    this.busy = false;
    await this.load();
  }
}
