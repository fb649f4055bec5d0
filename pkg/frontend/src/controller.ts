import { ApiClient, ApiError } from "./api.js";
import {
  renderClassPicker,
  renderErrorBanner,
  renderEvalTable,
  renderGallery,
  renderQueryHeader,
  renderResults,
} from "./render.js";
import { PAGE_SIZE, ViewState, initialState, pageCount, withClass, withK, withPage, withQuery } from "./state.js";
import { ClassInfo } from "./types.js";

/** Rendered HTML fragments for each region of the page. */
export interface ViewSink {
  classes(html: string): void;
  gallery(html: string): void;
  query(html: string): void;
  results(html: string): void;
  evalTable(html: string): void;
}

/**
 * Headless application core: owns the ViewState, talks to the service and
 * emits rendered HTML. The DOM layer only forwards events and swaps
 * fragments, so everything here is testable without a browser.
 */
export class App {
  state: ViewState = initialState();
  private classList: ClassInfo[] = [];
  private lastEvalK: number | undefined;

  constructor(
    private api: ApiClient,
    private sink: ViewSink,
  ) {}

  thumbnailUrl = (id: number): string => this.api.thumbnailUrl(id);

  async start(): Promise<void> {
    await this.refreshClasses();
    await this.showGallery();
  }

  async refreshClasses(): Promise<void> {
    try {
      this.classList = await this.api.classes();
      this.sink.classes(renderClassPicker(this.classList, this.state.selectedClass));
    } catch (err) {
      this.sink.classes(renderErrorBanner(`Cannot reach service: ${message(err)}`));
    }
  }

  async showGallery(): Promise<void> {
    const { selectedClass, page } = this.state;
    try {
      const images = await this.api.images(selectedClass, page, PAGE_SIZE);
      const total =
        selectedClass === null
          ? this.classList.reduce((acc, c) => acc + c.count, 0)
          : (this.classList.find((c) => c.name === selectedClass)?.count ?? images.length);
      this.sink.gallery(renderGallery(images, this.thumbnailUrl, page, pageCount(total)));
    } catch (err) {
      this.sink.gallery(renderErrorBanner(`Gallery unavailable: ${message(err)}`));
    }
  }

  async selectClass(className: string | null): Promise<void> {
    this.state = withClass(this.state, className);
    this.sink.classes(renderClassPicker(this.classList, className));
    await this.showGallery();
  }

  async selectPage(page: number): Promise<void> {
    this.state = withPage(this.state, page);
    await this.showGallery();
  }

  async setK(k: number): Promise<void> {
    this.state = withK(this.state, k);
    if (this.state.activeQuery?.kind === "id") {
      await this.queryById(this.state.activeQuery.id);
    }
    if (this.lastEvalK !== undefined && this.lastEvalK !== this.state.k) {
      await this.showEval();
    }
  }

  setExcludeSelf(exclude: boolean): void {
    this.state = { ...this.state, excludeSelf: exclude };
  }

  /** Run a query by indexed image id; result cards re-enter here on click. */
  async queryById(id: number): Promise<void> {
    try {
      const doc = await this.api.queryById(id, this.state.k, this.state.excludeSelf);
      this.state = withQuery(this.state, { kind: "id", id }, doc);
      this.sink.query(
        renderQueryHeader(`query: image #${id}`, this.thumbnailUrl(id), this.state.k, this.state.excludeSelf),
      );
      this.sink.results(renderResults(doc, this.thumbnailUrl));
    } catch (err) {
      if (isAbort(err)) return; // superseded by a newer query
      this.sink.results(renderErrorBanner(`Query failed: ${message(err)}`));
    }
  }

  async queryByUpload(file: Blob, name: string): Promise<void> {
    try {
      const doc = await this.api.queryByUpload(file, name, this.state.k);
      this.state = withQuery(this.state, { kind: "upload", name }, doc);
      this.sink.query(renderQueryHeader(`query: upload ${name}`, null, this.state.k, false));
      this.sink.results(renderResults(doc, this.thumbnailUrl));
    } catch (err) {
      if (isAbort(err)) return;
      // A 400 here is an upload rejection; show it inline where results go.
      this.sink.results(renderErrorBanner(`Query failed: ${message(err)}`));
    }
  }

  async showEval(): Promise<void> {
    this.lastEvalK = this.state.k;
    try {
      const summary = await this.api.evalSummary(this.state.k);
      this.sink.evalTable(renderEvalTable(summary));
    } catch (err) {
      this.sink.evalTable(renderErrorBanner(`Evaluation unavailable: ${message(err)}`));
    }
  }
}

function message(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
