// View state and its pure transitions. Fetching lives in the controller;
// every function here returns a new state, so sequences are replayable in
// tests without a DOM or a network.

import type { LayoutResponse } from "./api.js";

export interface Viewport {
  scale: number; // > 0
  offsetX: number;
  offsetY: number;
}

export interface ViewState {
  current: number;
  breadcrumb: number[]; // head is the root, last entry is `current`
  response: LayoutResponse | null;
  viewport: Viewport;
  hover: number | null;
  status: string | null; // transient message (e.g. "leaf node")
  error: string | null; // fetch failure banner
}

export const DEFAULT_VIEWPORT: Viewport = { scale: 1, offsetX: 0, offsetY: 0 };

export function initialView(root: number, response: LayoutResponse): ViewState {
  return {
    current: root,
    breadcrumb: [root],
    response,
    viewport: DEFAULT_VIEWPORT,
    hover: null,
    status: null,
    error: null,
  };
}

export function canZoomOut(state: ViewState): boolean {
  return state.breadcrumb.length >= 2;
}

export function isDisplayedChild(state: ViewState, id: number): boolean {
  return !!state.response?.children.some((c) => c.id === id);
}

/** Apply a successful zoom-in fetch: push the child and reset the viewport. */
export function zoomInApplied(
  state: ViewState,
  childId: number,
  response: LayoutResponse,
): ViewState {
  return {
    ...state,
    current: childId,
    breadcrumb: [...state.breadcrumb, childId],
    response,
    viewport: DEFAULT_VIEWPORT,
    hover: null,
    status: null,
    error: null,
  };
}

/** Apply a successful zoom-out fetch: pop one breadcrumb entry. */
export function zoomOutApplied(
  state: ViewState,
  response: LayoutResponse,
): ViewState {
  if (!canZoomOut(state)) return state;
  const breadcrumb = state.breadcrumb.slice(0, -1);
  const current = breadcrumb[breadcrumb.length - 1]!;
  return {
    ...state,
    current,
    breadcrumb,
    response,
    viewport: DEFAULT_VIEWPORT,
    hover: null,
    status: null,
    error: null,
  };
}

/** Jump to a breadcrumb prefix (index into the trail). */
export function breadcrumbJumpApplied(
  state: ViewState,
  index: number,
  response: LayoutResponse,
): ViewState {
  if (index < 0 || index >= state.breadcrumb.length) return state;
  const breadcrumb = state.breadcrumb.slice(0, index + 1);
  return {
    ...state,
    current: breadcrumb[breadcrumb.length - 1]!,
    breadcrumb,
    response,
    viewport: DEFAULT_VIEWPORT,
    hover: null,
    status: null,
    error: null,
  };
}

/** Clicking a leaf is a no-op apart from a status message. */
export function leafClicked(state: ViewState, id: number): ViewState {
  return { ...state, status: `node ${id} is a leaf` };
}

/** A failed fetch leaves navigation untouched and raises the banner. */
export function fetchFailed(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

export function hoverChanged(state: ViewState, id: number | null): ViewState {
  return state.hover === id ? state : { ...state, hover: id };
}

export function panBy(state: ViewState, dx: number, dy: number): ViewState {
  const viewport = {
    ...state.viewport,
    offsetX: state.viewport.offsetX + dx,
    offsetY: state.viewport.offsetY + dy,
  };
  return { ...state, viewport };
}

export function zoomViewport(state: ViewState, factor: number): ViewState {
  const scale = state.viewport.scale * factor;
  if (!(scale > 0) || !isFinite(scale)) return state;
  return { ...state, viewport: { ...state.viewport, scale } };
}

/**
 * Structural invariant: the trail starts at the root, ends at the current
 * scope, and every entry is the parent of its successor.
 */
export function breadcrumbValid(
  state: ViewState,
  root: number,
  parentOf: (id: number) => number | null,
): boolean {
  const trail = state.breadcrumb;
  if (trail.length === 0 || trail[0] !== root) return false;
  if (trail[trail.length - 1] !== state.current) return false;
  for (let i = 1; i < trail.length; i++) {
    if (parentOf(trail[i]!) !== trail[i - 1]) return false;
  }
  return state.viewport.scale > 0;
}
