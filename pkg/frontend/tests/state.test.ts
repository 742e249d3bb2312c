import { describe, expect, it } from "vitest";

import type { LayoutResponse } from "../src/api.js";
import {
  breadcrumbJumpApplied,
  breadcrumbValid,
  canZoomOut,
  fetchFailed,
  hoverChanged,
  initialView,
  leafClicked,
  panBy,
  zoomInApplied,
  zoomOutApplied,
  zoomViewport,
  type ViewState,
} from "../src/state.js";

// two triangles under a root: 8 -> {6, 7}, 6 -> {0,1,2}, 7 -> {3,4,5}
const TREE: Record<number, number[]> = {
  8: [6, 7],
  6: [0, 1, 2],
  7: [3, 4, 5],
};
const PARENT: Record<number, number> = { 6: 8, 7: 8, 0: 6, 1: 6, 2: 6, 3: 7, 4: 7, 5: 7 };
const ROOT = 8;

function layoutFor(id: number): LayoutResponse {
  const kids = TREE[id] ?? [];
  return {
    supernode: id,
    seed: 1,
    children: kids.map((c) => ({
      id: c,
      leaf_count: TREE[c] ? TREE[c].length : 1,
      label: `s${c}`,
    })),
    coords: kids.map((_, i) => [i === 0 ? -1 : 1, 0] as [number, number]),
    super_edges: kids.length === 2 ? [[kids[0]!, kids[1]!]] : [],
    metrics: {
      nd: 1,
      ulcv: 0,
      nd_bound: 10,
      ulcv_bound: 0.03,
      within_bounds: { nd: true, ulcv: true },
    },
  };
}

const parentOf = (id: number) => PARENT[id] ?? null;

function freshRoot(): ViewState {
  return initialView(ROOT, layoutFor(ROOT));
}

describe("view state transitions", () => {
  it("starts at the root with zoom-out disabled", () => {
    const s = freshRoot();
    expect(s.breadcrumb).toEqual([ROOT]);
    expect(canZoomOut(s)).toBe(false);
    expect(breadcrumbValid(s, ROOT, parentOf)).toBe(true);
  });

  it("zoom-in pushes, zoom-out restores the previous view", () => {
    let s = freshRoot();
    s = zoomInApplied(s, 6, layoutFor(6));
    expect(s.breadcrumb).toEqual([ROOT, 6]);
    expect(s.response?.children.map((c) => c.id)).toEqual([0, 1, 2]);
    expect(canZoomOut(s)).toBe(true);
    s = zoomOutApplied(s, layoutFor(ROOT));
    expect(s.breadcrumb).toEqual([ROOT]);
    expect(s.current).toBe(ROOT);
    expect(s.response).toEqual(layoutFor(ROOT));
  });

  it("zoom-out at the root is a no-op", () => {
    const s = freshRoot();
    expect(zoomOutApplied(s, layoutFor(ROOT))).toBe(s);
  });

  it("leaf clicks only set a status message", () => {
    let s = freshRoot();
    s = zoomInApplied(s, 6, layoutFor(6));
    const after = leafClicked(s, 1);
    expect(after.status).toContain("leaf");
    expect(after.breadcrumb).toEqual(s.breadcrumb);
    expect(after.response).toBe(s.response);
  });

  it("fetch failures raise the banner and change nothing else", () => {
    const s = freshRoot();
    const failed = fetchFailed(s, "server down");
    expect(failed.error).toBe("server down");
    expect(failed.breadcrumb).toEqual(s.breadcrumb);
    expect(failed.current).toBe(s.current);
    expect(failed.response).toBe(s.response);
  });

  it("breadcrumb jump truncates the trail", () => {
    let s = freshRoot();
    s = zoomInApplied(s, 6, layoutFor(6));
    s = breadcrumbJumpApplied(s, 0, layoutFor(ROOT));
    expect(s.breadcrumb).toEqual([ROOT]);
    expect(breadcrumbValid(s, ROOT, parentOf)).toBe(true);
  });

  it("viewport transforms keep scale positive", () => {
    let s = freshRoot();
    s = zoomViewport(s, 2);
    expect(s.viewport.scale).toBe(2);
    s = zoomViewport(s, 0);
    expect(s.viewport.scale).toBe(2); // rejected
    s = panBy(s, 5, -3);
    expect(s.viewport.offsetX).toBe(5);
    expect(s.viewport.offsetY).toBe(-3);
    expect(breadcrumbValid(s, ROOT, parentOf)).toBe(true);
  });

  it("hover is idempotent", () => {
    const s = freshRoot();
    const h = hoverChanged(s, 6);
    expect(h.hover).toBe(6);
    expect(hoverChanged(h, 6)).toBe(h);
  });
});

describe("scripted random navigation", () => {
  it("keeps the breadcrumb invariant across 20 random steps", () => {
    // deterministic LCG so the walk is replayable
    let rng = 123456789;
    const next = () => {
      rng = (1103515245 * rng + 12345) % 2147483648;
      return rng / 2147483648;
    };
    let s = freshRoot();
    for (let step = 0; step < 20; step++) {
      const kids = s.response?.children ?? [];
      const internal = kids.filter((c) => TREE[c.id] !== undefined);
      const wantDown = internal.length > 0 && (next() < 0.6 || !canZoomOut(s));
      if (wantDown) {
        const pick = internal[Math.floor(next() * internal.length)]!;
        s = zoomInApplied(s, pick.id, layoutFor(pick.id));
      } else if (canZoomOut(s)) {
        const parent = s.breadcrumb[s.breadcrumb.length - 2]!;
        s = zoomOutApplied(s, layoutFor(parent));
      } else {
        const pick = kids[Math.floor(next() * kids.length)];
        if (pick) s = leafClicked(s, pick.id);
      }
      expect(breadcrumbValid(s, ROOT, parentOf)).toBe(true);
      expect(s.response?.supernode).toBe(s.current);
    }
  });
});
