// Controller: wires the API client, the pure state transitions, and the
// canvas painter. At most one layout fetch is in flight; newer navigation
// aborts older requests. Responses are cached per supernode for instant
// zoom-out.
import { ApiClient } from "./api.js";
import { buildScene, circleAt } from "./scene.js";
import { breadcrumbJumpApplied, canZoomOut, fetchFailed, hoverChanged, initialView, leafClicked, panBy, zoomInApplied, zoomOutApplied, zoomViewport, } from "./state.js";
import { paint } from "./render.js";
const api = new ApiClient("");
const layoutCache = new Map();
const nodeCache = new Map();
let state = null;
let inflight = null;
const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const crumbBar = document.getElementById("breadcrumb");
const statusBar = document.getElementById("status");
const banner = document.getElementById("banner");
const zoomOutBtn = document.getElementById("zoom-out");
const infoBar = document.getElementById("info");
async function fetchLayout(id) {
    const cached = layoutCache.get(id);
    if (cached)
        return cached;
    inflight?.abort();
    inflight = new AbortController();
    const resp = await api.layout(id, undefined, inflight.signal);
    layoutCache.set(id, resp);
    return resp;
}
async function nodeInfo(id) {
    const cached = nodeCache.get(id);
    if (cached)
        return cached;
    const info = await api.node(id);
    nodeCache.set(id, info);
    return info;
}
function render() {
    if (!state)
        return;
    const scene = buildScene(state, canvas.width, canvas.height);
    paint(ctx, scene);
    crumbBar.replaceChildren(...scene.breadcrumb.map(({ id, index }) => {
        const btn = document.createElement("button");
        btn.textContent = index === 0 ? "root" : `s${id}`;
        btn.className = "crumb";
        btn.onclick = () => void jumpTo(index);
        return btn;
    }));
    zoomOutBtn.disabled = !scene.canZoomOut;
    statusBar.textContent = scene.status ?? "";
    banner.textContent = scene.error ?? "";
    banner.style.display = scene.error ? "block" : "none";
    const resp = state.response;
    if (resp) {
        const nd = resp.metrics.nd;
        const ulcv = resp.metrics.ulcv;
        infoBar.textContent =
            `${resp.children.length} nodes, ${resp.super_edges.length} edges` +
                (nd !== null ? ` | crowding ${fmt(nd)}` : "") +
                (ulcv !== null ? ` | edge-length CV ${fmt(ulcv)}` : "");
    }
}
function fmt(v) {
    return v === "inf" ? "inf" : v.toPrecision(3);
}
async function jumpTo(index) {
    if (!state || index >= state.breadcrumb.length - 1)
        return;
    const target = state.breadcrumb[index];
    try {
        const resp = await fetchLayout(target);
        state = breadcrumbJumpApplied(state, index, resp);
    }
    catch (err) {
        state = fetchFailed(state, describe(err));
    }
    render();
}
async function zoomIn(childId) {
    if (!state)
        return;
    try {
        const info = await nodeInfo(childId);
        if (info.children.length === 0) {
            state = leafClicked(state, childId);
            render();
            return;
        }
        const resp = await fetchLayout(childId);
        state = zoomInApplied(state, childId, resp);
    }
    catch (err) {
        state = fetchFailed(state, describe(err));
    }
    render();
}
async function zoomOut() {
    if (!state || !canZoomOut(state))
        return;
    const parent = state.breadcrumb[state.breadcrumb.length - 2];
    try {
        const resp = await fetchLayout(parent);
        state = zoomOutApplied(state, resp);
    }
    catch (err) {
        state = fetchFailed(state, describe(err));
    }
    render();
}
function describe(err) {
    if (err instanceof DOMException && err.name === "AbortError")
        return "";
    return err instanceof Error ? err.message : String(err);
}
function canvasPoint(ev) {
    const rect = canvas.getBoundingClientRect();
    return {
        x: ((ev.clientX - rect.left) / rect.width) * canvas.width,
        y: ((ev.clientY - rect.top) / rect.height) * canvas.height,
    };
}
canvas.addEventListener("click", (ev) => {
    if (!state)
        return;
    const { x, y } = canvasPoint(ev);
    const hit = circleAt(buildScene(state, canvas.width, canvas.height), x, y);
    if (hit)
        void zoomIn(hit.id);
});
canvas.addEventListener("mousemove", (ev) => {
    if (!state)
        return;
    const { x, y } = canvasPoint(ev);
    const hit = circleAt(buildScene(state, canvas.width, canvas.height), x, y);
    const next = hoverChanged(state, hit ? hit.id : null);
    if (next !== state) {
        state = next;
        render();
    }
});
canvas.addEventListener("wheel", (ev) => {
    if (!state)
        return;
    ev.preventDefault();
    state = zoomViewport(state, ev.deltaY < 0 ? 1.1 : 1 / 1.1);
    render();
});
let dragging = null;
canvas.addEventListener("mousedown", (ev) => {
    dragging = { x: ev.clientX, y: ev.clientY };
});
window.addEventListener("mouseup", () => {
    dragging = null;
});
window.addEventListener("mousemove", (ev) => {
    if (!dragging || !state)
        return;
    state = panBy(state, ev.clientX - dragging.x, ev.clientY - dragging.y);
    dragging = { x: ev.clientX, y: ev.clientY };
    render();
});
zoomOutBtn.addEventListener("click", () => void zoomOut());
async function boot() {
    try {
        const hier = await api.hierarchy();
        const resp = await fetchLayout(hier.root);
        state = initialView(hier.root, resp);
        document.getElementById("title").textContent =
            `graph: ${hier.n} nodes, ${hier.m} edges, ${hier.levels} levels (k=${hier.k})`;
    }
    catch (err) {
        banner.textContent = `failed to load: ${describe(err)}`;
        banner.style.display = "block";
        return;
    }
    render();
}
void boot();
//# sourceMappingURL=main.js.map