import { ClassInfo, EvalSummary, ImageRef, QueryEntry, RankedDocument } from "./types.js";

export const FEATURE_ORDER = ["hist", "moments", "hu", "fused"] as const;

const FEATURE_LABELS: Record<string, string> = {
  hist: "Histogram",
  moments: "Color moments",
  hu: "Shape invariants",
  fused: "Fused",
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Distances are shown at 4 significant digits; the raw value rides in the tooltip. */
export function formatDistance(value: number): string {
  return Number(value.toPrecision(4)).toString();
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}

export function renderClassPicker(classes: ClassInfo[], selected: string | null): string {
  const total = classes.reduce((acc, c) => acc + c.count, 0);
  const options = [
    `<button class="class-chip ${selected === null ? "active" : ""}" data-class="">All (${total})</button>`,
  ];
  for (const cls of classes) {
    const active = selected === cls.name ? "active" : "";
    options.push(
      `<button class="class-chip ${active}" data-class="${escapeHtml(cls.name)}">` +
        `${escapeHtml(cls.name)} (${cls.count})</button>`,
    );
  }
  return `<nav class="class-picker">${options.join("")}</nav>`;
}

export function renderGallery(
  images: ImageRef[],
  thumbnailUrl: (id: number) => string,
  page: number,
  pages: number,
): string {
  if (images.length === 0) {
    return `<div class="empty-state">No images in this class.</div>`;
  }
  const cells = images
    .map(
      (img) =>
        `<figure class="thumb" data-query-id="${img.id}">` +
        `<img src="${thumbnailUrl(img.id)}" alt="image ${img.id}" loading="lazy">` +
        `<figcaption>#${img.id} ${escapeHtml(img.label)}</figcaption></figure>`,
    )
    .join("");
  const nav =
    `<div class="pager">` +
    `<button data-page="${page - 1}" ${page <= 0 ? "disabled" : ""}>&laquo; prev</button>` +
    `<span>page ${page + 1} / ${pages}</span>` +
    `<button data-page="${page + 1}" ${page >= pages - 1 ? "disabled" : ""}>next &raquo;</button>` +
    `</div>`;
  return `<div class="gallery-grid">${cells}</div>${nav}`;
}

function segmentBars(entry: QueryEntry): string {
  const parts: [string, number][] = [
    ["histogram", entry.segments.histogram],
    ["moments", entry.segments.moments],
    ["hu", entry.segments.hu],
  ];
  const max = Math.max(entry.distance, 1e-12);
  return parts
    .map(([name, value]) => {
      const pct = Math.min(100, (100 * value) / max);
      return (
        `<div class="seg-row" title="${name}: ${value}">` +
        `<span class="seg-name">${name.slice(0, 4)}</span>` +
        `<span class="seg-track"><span class="seg-fill seg-${name}" style="width:${pct.toFixed(1)}%"></span></span>` +
        `</div>`
      );
    })
    .join("");
}

export function renderResults(
  doc: RankedDocument,
  thumbnailUrl: (id: number) => string,
): string {
  if (doc.entries.length === 0) {
    return `<div class="empty-state">No results.</div>`;
  }
  const cards = doc.entries
    .map(
      (entry, i) =>
        `<figure class="result-card" data-query-id="${entry.id}" ` +
        `title="rank ${i + 1}, distance ${entry.distance}">` +
        `<img src="${thumbnailUrl(entry.id)}" alt="result ${entry.id}" loading="lazy">` +
        `<figcaption>` +
        `<span class="result-rank">${i + 1}</span> ` +
        `#${entry.id} ${escapeHtml(entry.label)}` +
        `<span class="result-distance">d = ${formatDistance(entry.distance)}</span>` +
        `</figcaption>` +
        `<div class="seg-chart">${segmentBars(entry)}</div>` +
        `</figure>`,
    )
    .join("");
  return `<div class="results-grid">${cards}</div>`;
}

export function renderQueryHeader(
  label: string,
  imageUrl: string | null,
  k: number,
  excludeSelf: boolean,
): string {
  const img = imageUrl ? `<img src="${imageUrl}" alt="query image">` : "";
  return (
    `<div class="query-header">` +
    `${img}<div class="query-meta">` +
    `<div class="query-label">${escapeHtml(label)}</div>` +
    `<div>k = ${k}${excludeSelf ? ", excluding self" : ""}</div>` +
    `</div></div>`
  );
}

export function renderEvalTable(summary: EvalSummary): string {
  const header =
    `<tr><th>class</th>` +
    FEATURE_ORDER.map(
      (f) => `<th class="${f === "fused" ? "fused-col" : ""}">${FEATURE_LABELS[f]}</th>`,
    ).join("") +
    `</tr>`;
  const byFeature = new Map<string, Map<string, number>>();
  for (const feature of FEATURE_ORDER) {
    const report = summary.features[feature];
    byFeature.set(feature, new Map(report.rows.map((row) => [row.class, row.precision])));
  }
  const rows = summary.classes
    .map((cls) => {
      const cells = FEATURE_ORDER.map((f) => {
        const value = byFeature.get(f)?.get(cls);
        const text = value === undefined ? "-" : value.toFixed(1);
        return `<td class="${f === "fused" ? "fused-col" : ""}">${text}</td>`;
      }).join("");
      return `<tr><td>${escapeHtml(cls)}</td>${cells}</tr>`;
    })
    .join("");
  const meanCells = FEATURE_ORDER.map((f) => {
    const mean = summary.features[f].mean_precision;
    return `<td class="${f === "fused" ? "fused-col" : ""}">${mean.toFixed(1)}</td>`;
  }).join("");
  return (
    `<table class="eval-table">` +
    `<thead>${header}</thead>` +
    `<tbody>${rows}<tr class="mean-row"><td>mean</td>${meanCells}</tr></tbody>` +
    `</table>` +
    `<p class="eval-note">precision@${summary.k} (%), ${summary.mode} scaling</p>`
  );
}
