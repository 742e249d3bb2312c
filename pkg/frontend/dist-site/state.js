// View state and its pure transitions. Fetching lives in the controller;
// every function here returns a new state, so sequences are replayable in
// tests without a DOM or a network.
export const DEFAULT_VIEWPORT = { scale: 1, offsetX: 0, offsetY: 0 };
export function initialView(root, response) {
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
export function canZoomOut(state) {
    return state.breadcrumb.length >= 2;
}
export function isDisplayedChild(state, id) {
    return !!state.response?.children.some((c) => c.id === id);
}
/** Apply a successful zoom-in fetch: push the child and reset the viewport. */
export function zoomInApplied(state, childId, response) {
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
export function zoomOutApplied(state, response) {
    if (!canZoomOut(state))
        return state;
    const breadcrumb = state.breadcrumb.slice(0, -1);
    const current = breadcrumb[breadcrumb.length - 1];
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
export function breadcrumbJumpApplied(state, index, response) {
    if (index < 0 || index >= state.breadcrumb.length)
        return state;
    const breadcrumb = state.breadcrumb.slice(0, index + 1);
    return {
        ...state,
        current: breadcrumb[breadcrumb.length - 1],
        breadcrumb,
        response,
        viewport: DEFAULT_VIEWPORT,
        hover: null,
        status: null,
        error: null,
    };
}
/** Clicking a leaf is a no-op apart from a status message. */
export function leafClicked(state, id) {
    return { ...state, status: `node ${id} is a leaf` };
}
/** A failed fetch leaves navigation untouched and raises the banner. */
export function fetchFailed(state, message) {
    return { ...state, error: message };
}
export function hoverChanged(state, id) {
    return state.hover === id ? state : { ...state, hover: id };
}
export function panBy(state, dx, dy) {
    const viewport = {
        ...state.viewport,
        offsetX: state.viewport.offsetX + dx,
        offsetY: state.viewport.offsetY + dy,
    };
    return { ...state, viewport };
}
export function zoomViewport(state, factor) {
    const scale = state.viewport.scale * factor;
    if (!(scale > 0) || !isFinite(scale))
        return state;
    return { ...state, viewport: { ...state.viewport, scale } };
}
/**
 * Structural invariant: the trail starts at the root, ends at the current
 * scope, and every entry is the parent of its successor.
 */
export function breadcrumbValid(state, root, parentOf) {
    const trail = state.breadcrumb;
    if (trail.length === 0 || trail[0] !== root)
        return false;
    if (trail[trail.length - 1] !== state.current)
        return false;
    for (let i = 1; i < trail.length; i++) {
        if (parentOf(trail[i]) !== trail[i - 1])
            return false;
    }
    return state.viewport.scale > 0;
}
//# sourceMappingURL=state.js.map