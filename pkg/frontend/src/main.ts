import { JobRecord } from "./api.js";
import { mountNotices, notify } from "./notices.js";
import { JobPoller } from "./polling.js";
import { AdminModelsView } from "./views/admin.js";
import { AnalysisView } from "./views/analysis.js";
import { LectureListView } from "./views/lectures.js";
import { TrendsView } from "./views/trends.js";
import { UploadView } from "./views/upload.js";

const TABS = ["upload", "lectures", "analysis", "trends", "models"] as const;
type Tab = (typeof TABS)[number];

function mountApp(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.innerHTML = `
    <header>
      <h1>lectio</h1>
      <nav>${TABS.map((t) => `<a href="#${t}" data-tab="${t}">${t}</a>`).join("")}</nav>
      <div id="notices"></div>
    </header>
    <main>${TABS.map((t) => `<section id="view-${t}" hidden></section>`).join("")}</main>
  `;
  mountNotices(document.getElementById("notices")!);

  const panel = (tab: Tab) => document.getElementById(`view-${tab}`)!;

  const onJobUpdate = (job: JobRecord) => {
    if (job.state === "error") {
      notify(new Error(`job ${job.job_id} failed: ${job.error_message}`));
    }
    if (job.state === "done" || job.state === "error") {
      void lectureList.load();
    }
  };
  const poller = new JobPoller(onJobUpdate);

  const analysis = new AnalysisView(panel("analysis"));
  const lectureList = new LectureListView(panel("lectures"), poller, () => {
    show("analysis");
  });
  const trendsView = new TrendsView(panel("trends"));
  const adminView = new AdminModelsView(panel("models"));
  new UploadView(panel("upload"), poller, () => void lectureList.load());

  function show(tab: Tab): void {
    for (const t of TABS) panel(t).hidden = t !== tab;
    if (tab === "lectures") void lectureList.load();
    if (tab === "analysis") void analysis.load();
    if (tab === "trends") void trendsView.load();
    if (tab === "models") void adminView.load();
  }

  window.addEventListener("hashchange", () => {
    const tab = window.location.hash.slice(1) as Tab;
    if (TABS.includes(tab)) show(tab);
  });
  const initial = window.location.hash.slice(1) as Tab;
  show(TABS.includes(initial) ? initial : "upload");
}

mountApp();
