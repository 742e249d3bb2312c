// Scene construction: a pure function from ViewState to drawable primitives.
// The canvas painter consumes the scene; tests snapshot it directly.
const PADDING_FRACTION = 0.12;
const MAX_RADIUS_FRACTION = 0.05;
const MIN_RADIUS_PX = 4;
/** Map normalized [-1,1] coordinates into pixels with a uniform scale. */
export function buildScene(state, width, height) {
    const base = {
        width,
        height,
        circles: [],
        edges: [],
        breadcrumb: state.breadcrumb.map((id, index) => ({ id, index })),
        canZoomOut: state.breadcrumb.length >= 2,
        tooltip: null,
        status: state.status,
        error: state.error,
        empty: null,
    };
    const resp = state.response;
    if (!resp || resp.children.length === 0) {
        base.empty = "nothing to show";
        return base;
    }
    const half = Math.min(width, height) / 2;
    const scale = half * (1 - PADDING_FRACTION) * state.viewport.scale;
    const cx = width / 2 + state.viewport.offsetX;
    const cy = height / 2 + state.viewport.offsetY;
    const px = (x) => round2(cx + x * scale);
    const py = (y) => round2(cy + y * scale);
    const maxLeaf = Math.max(...resp.children.map((c) => c.leaf_count), 1);
    const slotById = new Map();
    resp.children.forEach((c, i) => slotById.set(c.id, i));
    base.circles = resp.children.map((child, i) => {
        const [x, y] = resp.coords[i] ?? [0, 0];
        const rel = Math.sqrt(child.leaf_count / maxLeaf);
        return {
            id: child.id,
            label: child.label,
            leafCount: child.leaf_count,
            x: px(x),
            y: py(y),
            r: round2(Math.max(MIN_RADIUS_PX, rel * MAX_RADIUS_FRACTION * 2 * half)),
            hovered: state.hover === child.id,
        };
    });
    const directed = new Set(resp.super_edges.map(([a, b]) => `${a}>${b}`));
    const drawn = new Set();
    for (const [a, b] of resp.super_edges) {
        const key = a < b ? `${a}|${b}` : `${b}|${a}`;
        if (drawn.has(key))
            continue;
        drawn.add(key);
        const si = slotById.get(a);
        const sj = slotById.get(b);
        if (si === undefined || sj === undefined)
            continue;
        const [xa, ya] = resp.coords[si] ?? [0, 0];
        const [xb, yb] = resp.coords[sj] ?? [0, 0];
        base.edges.push({
            from: a,
            to: b,
            x1: px(xa),
            y1: py(ya),
            x2: px(xb),
            y2: py(yb),
            arrowhead: !directed.has(`${b}>${a}`),
        });
    }
    if (state.hover !== null) {
        const hit = base.circles.find((c) => c.id === state.hover);
        if (hit) {
            base.tooltip = {
                id: hit.id,
                label: hit.label,
                leafCount: hit.leafCount,
                x: hit.x,
                y: hit.y - hit.r - 6,
            };
        }
    }
    return base;
}
/** Topmost circle containing the point, if any (hit test for clicks/hover). */
export function circleAt(scene, x, y) {
    for (let i = scene.circles.length - 1; i >= 0; i--) {
        const c = scene.circles[i];
        const dx = x - c.x;
        const dy = y - c.y;
        if (dx * dx + dy * dy <= c.r * c.r)
            return c;
    }
    return null;
}
function round2(v) {
    return Math.round(v * 100) / 100;
}
//# sourceMappingURL=scene.js.map