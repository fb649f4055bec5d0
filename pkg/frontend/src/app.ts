import { ApiClient } from "./api.js";
import { App, ViewSink } from "./controller.js";
import { MAX_K, MIN_K } from "./state.js";

// Base URL is configurable for serving the assets separately from the API.
const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";

function region(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

const sink: ViewSink = {
  classes: (html) => (region("classes").innerHTML = html),
  gallery: (html) => (region("gallery").innerHTML = html),
  query: (html) => (region("query-header").innerHTML = html),
  results: (html) => (region("results").innerHTML = html),
  evalTable: (html) => (region("eval-table").innerHTML = html),
};

const app = new App(new ApiClient(baseUrl), sink);

function wire(): void {
  region("classes").addEventListener("click", (ev) => {
    const chip = (ev.target as HTMLElement).closest<HTMLElement>("[data-class]");
    if (chip) void app.selectClass(chip.dataset.class || null);
  });

  // Thumbnails and result cards both launch queries via data-query-id.
  for (const id of ["gallery", "results"]) {
    region(id).addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const card = target.closest<HTMLElement>("[data-query-id]");
      if (card) {
        void app.queryById(Number(card.dataset.queryId));
        return;
      }
      const pager = target.closest<HTMLElement>("[data-page]");
      if (pager && !pager.hasAttribute("disabled")) {
        void app.selectPage(Number(pager.dataset.page));
      }
    });
  }

  const kInput = region("k-input") as HTMLInputElement;
  kInput.min = String(MIN_K);
  kInput.max = String(MAX_K);
  kInput.addEventListener("change", () => {
    void app.setK(Number(kInput.value));
    kInput.value = String(app.state.k);
  });

  const excludeToggle = region("exclude-self") as HTMLInputElement;
  excludeToggle.addEventListener("change", () => app.setExcludeSelf(excludeToggle.checked));

  const upload = region("upload-input") as HTMLInputElement;
  upload.addEventListener("change", () => {
    const file = upload.files?.[0];
    if (file) void app.queryByUpload(file, file.name);
  });

  region("eval-button").addEventListener("click", () => void app.showEval());
}

wire();
void app.start();
