import { QuerySource, RankedDocument } from "./types.js";

export const MIN_K = 1;
export const MAX_K = 100;
export const PAGE_SIZE = 20;

export interface ViewState {
  selectedClass: string | null; // null = all classes
  page: number;
  k: number;
  excludeSelf: boolean;
  activeQuery: QuerySource | null;
  lastResult: RankedDocument | null;
}

export function initialState(): ViewState {
  return {
    selectedClass: null,
    page: 0,
    k: 20,
    excludeSelf: false,
    activeQuery: null,
    lastResult: null,
  };
}

export function clampK(k: number): number {
  if (!Number.isFinite(k)) return 20;
  return Math.min(MAX_K, Math.max(MIN_K, Math.round(k)));
}

export function withClass(state: ViewState, className: string | null): ViewState {
  // Changing class restarts pagination.
  return { ...state, selectedClass: className, page: 0 };
}

export function withPage(state: ViewState, page: number): ViewState {
  return { ...state, page: Math.max(0, page) };
}

export function withK(state: ViewState, k: number): ViewState {
  return { ...state, k: clampK(k) };
}

export function withQuery(state: ViewState, query: QuerySource, result: RankedDocument): ViewState {
  return { ...state, activeQuery: query, lastResult: result };
}

export function pageCount(total: number, per: number = PAGE_SIZE): number {
  return Math.max(1, Math.ceil(total / per));
}
