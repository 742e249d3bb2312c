// Round-trip against a live service: preprocess the two-triangle fixture,
// start the HTTP server as a child process, and drive the explorer state
// with real fetches.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type LayoutResponse } from "../src/api.js";
import {
  breadcrumbValid,
  canZoomOut,
  initialView,
  leafClicked,
  zoomInApplied,
  zoomOutApplied,
  type ViewState,
} from "../src/state.js";

const REPO_ROOT = resolve(__dirname, "..", "..");
const PYTHON = process.env.PPRVIZ_PYTHON ?? "python3";
const ENV = {
  ...process.env,
  PYTHONPATH: join(REPO_ROOT, "src"),
  PYTHONUNBUFFERED: "1",
};

let workdir: string;
let server: ChildProcess | null = null;
let base = "";
let api: ApiClient;
let root = -1;
const layoutCache = new Map<number, LayoutResponse>();

async function fetchLayout(id: number): Promise<LayoutResponse> {
  const hit = layoutCache.get(id);
  if (hit) return hit;
  const resp = await api.layout(id);
  layoutCache.set(id, resp);
  return resp;
}

async function parentOf(id: number): Promise<number | null> {
  const info = await api.node(id);
  return info.parent;
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "pprviz-live-"));
  const edgeList = join(workdir, "tri.el");
  writeFileSync(edgeList, "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n");
  const pre = spawnSync(
    PYTHON,
    ["-m", "pprviz.cli", "preprocess", "-i", edgeList, "-k", "5",
     "-o", join(workdir, "ws"), "--symmetrize"],
    { env: ENV, encoding: "utf-8" },
  );
  if (pre.status !== 0) {
    throw new Error(`preprocess failed: ${pre.stderr}\n${pre.stdout}`);
  }
  server = spawn(
    PYTHON,
    ["-m", "pprviz.cli", "serve", "-w", join(workdir, "ws"), "--port", "0"],
    { env: ENV },
  );
  base = await new Promise<string>((resolvePromise, reject) => {
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error(`service did not start: ${buffer}`)),
      60_000,
    );
    server!.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolvePromise(match[1]!);
      }
    });
    server!.on("exit", (code) =>
      reject(new Error(`service exited early (${code}): ${buffer}`)),
    );
  });
  api = new ApiClient(base);
  const hier = await api.hierarchy();
  root = hier.root;
  expect(hier.n).toBe(6);
}, 120_000);

afterAll(() => {
  server?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("explorer against a live service", () => {
  it("zoom-in to a triangle and zoom-out restores the root view", async () => {
    const rootLayout = await fetchLayout(root);
    expect(rootLayout.children).toHaveLength(2);
    expect(rootLayout.super_edges.length).toBeGreaterThan(0);
    let view = initialView(root, rootLayout);

    const child = rootLayout.children[0]!.id;
    view = zoomInApplied(view, child, await fetchLayout(child));
    expect(view.response!.children).toHaveLength(3);
    expect(view.response!.children.every((c) => c.leaf_count === 1)).toBe(true);
    expect(view.breadcrumb).toEqual([root, child]);

    view = zoomOutApplied(view, await fetchLayout(root));
    expect(view.current).toBe(root);
    expect(view.breadcrumb).toEqual([root]);
    // identical view as served: the service is deterministic per seed
    expect(view.response).toEqual(rootLayout);
    expect(await api.layout(root)).toEqual(rootLayout);
  }, 60_000);

  it("keeps the breadcrumb invariant across 20 live navigation steps", async () => {
    let view: ViewState = initialView(root, await fetchLayout(root));
    const parents = new Map<number, number | null>();
    const parentLookup = (id: number) =>
      parents.has(id) ? parents.get(id)! : null;
    let rng = 987654321;
    const next = () => {
      rng = (1103515245 * rng + 12345) % 2147483648;
      return rng / 2147483648;
    };
    for (let step = 0; step < 20; step++) {
      const kids = view.response?.children ?? [];
      const internal: number[] = [];
      for (const c of kids) {
        const info = await api.node(c.id);
        parents.set(c.id, info.parent);
        if (info.children.length > 0) internal.push(c.id);
      }
      parents.set(view.current, await parentOf(view.current));
      const goDown =
        internal.length > 0 && (next() < 0.6 || !canZoomOut(view));
      if (goDown) {
        const pick = internal[Math.floor(next() * internal.length)]!;
        view = zoomInApplied(view, pick, await fetchLayout(pick));
      } else if (canZoomOut(view)) {
        const parent = view.breadcrumb[view.breadcrumb.length - 2]!;
        view = zoomOutApplied(view, await fetchLayout(parent));
      } else if (kids.length > 0) {
        view = leafClicked(view, kids[0]!.id);
      }
      expect(breadcrumbValid(view, root, parentLookup)).toBe(true);
      expect(view.response?.supernode).toBe(view.current);
    }
  }, 60_000);

  it("surfaces API errors without breaking the view", async () => {
    const view = initialView(root, await fetchLayout(root));
    await expect(api.layout(999_999)).rejects.toMatchObject({ status: 404 });
    await expect(api.layout(0)).rejects.toMatchObject({ status: 400 });
    // state is untouched by failed fetches (controller applies fetchFailed)
    expect(view.breadcrumb).toEqual([root]);
  }, 60_000);
});
