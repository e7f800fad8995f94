/** Browser entry: wires the canvas, the controls, and the query loop. */

import { ApiError, Client, paramsForViewport, type QueryParams } from "./api.js";
import { QueryLoop } from "./fetcher.js";
import { paintSlices, type RectSink, type SliceStyle } from "./paint.js";
import type { DatasetDescriptor, QueryResponse, WireSlice } from "./types.js";
import { decodeState, encodeState, stateOf } from "./url.js";
import {
  clampToExtent,
  overview,
  pan,
  resize,
  zoom,
  type Extent,
  type Viewport,
} from "./viewport.js";

const WHEEL_STEP = 1.25;
const TRACK_GAP = 2;

interface RenderModel {
  slices: WireSlice[];
  colorAttr: string | null;
  stale: boolean;
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

/** RectSink that draws track bands onto a 2d canvas context. */
class CanvasSink implements RectSink {
  constructor(
    private readonly ctx: CanvasRenderingContext2D,
    private readonly trackLo: number,
    private readonly bandPx: number,
  ) {}

  rect(c0: number, c1: number, trackLo: number, trackHi: number, style: SliceStyle): void {
    const y = (trackLo - this.trackLo) * this.bandPx;
    const h = (trackHi - trackLo + 1) * this.bandPx - TRACK_GAP;
    this.ctx.fillStyle = style.fill;
    this.ctx.globalAlpha = style.exact ? 1.0 : 0.55;
    this.ctx.fillRect(c0, y, c1 - c0 + 1, Math.max(h, 1));
  }
}

class ViewerApp {
  private readonly client: Client;
  private readonly loop: QueryLoop;
  private readonly session = `tab-${Math.random().toString(36).slice(2, 10)}`;
  private datasets: DatasetDescriptor[] = [];
  private current: DatasetDescriptor | null = null;
  private viewport: Viewport | null = null;
  private builder = "1dkdt";
  private model: RenderModel = { slices: [], colorAttr: null, stale: false };

  private readonly canvas = el<HTMLCanvasElement>("chart");
  private readonly datasetSel = el<HTMLSelectElement>("dataset");
  private readonly builderSel = el<HTMLSelectElement>("builder");
  private readonly fidelitySel = el<HTMLSelectElement>("fidelity");
  private readonly attrSel = el<HTMLSelectElement>("filter-attr");
  private readonly valueInput = el<HTMLInputElement>("filter-value");
  private readonly fetchLabel = el<HTMLSpanElement>("fetch-time");
  private readonly banner = el<HTMLDivElement>("error-banner");

  constructor(baseUrl: string) {
    this.client = new Client(baseUrl);
    this.loop = new QueryLoop(
      (p, signal) => this.client.query(p, signal),
      {
        onApply: (resp, params) => this.applyResponse(resp, params),
        onError: (err) => this.showError(err),
        onBusy: (busy) => {
          this.model.stale = busy;
          this.paint();
        },
      },
    );
  }

  private extent(): Extent {
    const te = this.current!.time_extent;
    return { begin: BigInt(te.begin), end: BigInt(te.end) };
  }

  async start(): Promise<void> {
    this.datasets = await this.client.datasets();
    if (this.datasets.length === 0) {
      this.showError(new Error("the server has no datasets"));
      return;
    }
    for (const d of this.datasets) {
      const opt = document.createElement("option");
      opt.value = d.name;
      opt.textContent = `${d.name} (${d.events} events)`;
      this.datasetSel.appendChild(opt);
    }
    const fromUrl = decodeState(location.hash);
    const initial =
      (fromUrl && this.datasets.find((d) => d.name === fromUrl.dataset)) || this.datasets[0];
    this.selectDataset(initial, fromUrl?.dataset === initial.name ? fromUrl : null);
    this.bindControls();
    this.bindGestures();
  }

  private selectDataset(d: DatasetDescriptor, urlState: ReturnType<typeof decodeState>): void {
    this.current = d;
    this.datasetSel.value = d.name;
    this.builder = urlState?.builder && d.builders.includes(urlState.builder)
      ? urlState.builder
      : d.builders[0];
    this.builderSel.innerHTML = "";
    for (const b of d.builders) {
      const opt = document.createElement("option");
      opt.value = b;
      opt.textContent = b;
      this.builderSel.appendChild(opt);
    }
    this.builderSel.value = this.builder;

    this.attrSel.innerHTML = "<option value=''>(no filter)</option>";
    const catAttrs = Object.entries(d.attr_schema)
      .filter(([, kind]) => kind === "categorical")
      .map(([name]) => name);
    for (const name of catAttrs) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      this.attrSel.appendChild(opt);
    }
    this.model.colorAttr = catAttrs[0] ?? null;

    const width = Math.max(this.canvas.clientWidth, 100);
    const ext = { begin: BigInt(d.time_extent.begin), end: BigInt(d.time_extent.end) };
    let vp: Viewport = {
      begin: ext.begin,
      end: ext.end,
      trackLo: 0,
      trackHi: d.tracks - 1,
      canvasPx: width,
      pixelWindow: urlState?.pixelWindow ?? 1,
      filter: urlState?.filter ?? null,
    };
    if (urlState) vp = clampToExtent({ ...vp, begin: urlState.begin, end: urlState.end }, ext);
    if (vp.filter) {
      this.attrSel.value = vp.filter.attr;
      this.valueInput.value = vp.filter.value;
    }
    this.fidelitySel.value = String(vp.pixelWindow);
    this.setViewport(vp);
  }

  /** Central state change: remember the viewport, sync the URL, re-query.
   * Gesture handlers feed pixel deltas in here; no event-level work. */
  private setViewport(vp: Viewport): void {
    if (vp === this.viewport) return; // unchanged; skip the redundant query
    this.viewport = vp;
    location.hash = encodeState(stateOf(this.current!.name, vp, this.builder));
    this.loop.request(this.queryParams());
  }

  private queryParams(): QueryParams {
    return paramsForViewport(this.current!.name, this.viewport!, this.builder, this.session);
  }

  private applyResponse(resp: QueryResponse, _params: QueryParams): void {
    this.model.slices = resp.slices;
    this.model.stale = false;
    this.banner.hidden = true;
    this.fetchLabel.textContent = `${(resp.stats.fetch_ns / 1e6).toFixed(1)} ms, ${resp.slices.length} slices`;
    this.paint();
  }

  private showError(err: unknown): void {
    const msg = err instanceof ApiError ? `server: ${err.message}` : String(err);
    this.banner.textContent = msg;
    this.banner.hidden = false;
  }

  private paint(): void {
    if (!this.viewport || !this.current) return;
    const vp = this.viewport;
    const ctx = this.canvas.getContext("2d")!;
    const tracks = vp.trackHi - vp.trackLo + 1;
    const band = Math.max(Math.floor(this.canvas.height / tracks), TRACK_GAP + 1);
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    paintSlices(new CanvasSink(ctx, vp.trackLo, band), this.model.slices, vp, this.model.colorAttr);
    ctx.globalAlpha = 1.0;
    if (this.model.stale) {
      ctx.fillStyle = "rgba(255,255,255,0.25)";
      ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    }
  }

  private bindControls(): void {
    this.datasetSel.addEventListener("change", () => {
      const d = this.datasets.find((x) => x.name === this.datasetSel.value);
      if (d) this.selectDataset(d, null);
    });
    this.builderSel.addEventListener("change", () => {
      this.builder = this.builderSel.value;
      this.setViewport({ ...this.viewport! });
    });
    this.fidelitySel.addEventListener("change", () => {
      this.setViewport({ ...this.viewport!, pixelWindow: Number(this.fidelitySel.value) });
    });
    const applyFilter = () => {
      const attr = this.attrSel.value;
      const value = this.valueInput.value.trim();
      const filter = attr && value ? { attr, value } : null;
      this.setViewport({ ...this.viewport!, filter });
    };
    this.attrSel.addEventListener("change", applyFilter);
    this.valueInput.addEventListener("change", applyFilter);
    el<HTMLButtonElement>("reset").addEventListener("click", () => {
      this.setViewport(overview(this.viewport!, this.extent()));
    });

    new ResizeObserver(() => {
      const width = Math.max(this.canvas.clientWidth, 100);
      this.canvas.width = width;
      this.canvas.height = this.canvas.clientHeight || 300;
      this.setViewport(resize(this.viewport!, width, this.extent()));
      this.paint();
    }).observe(this.canvas);
  }

  private bindGestures(): void {
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? WHEEL_STEP : 1 / WHEEL_STEP;
      const anchor = ev.offsetX;
      this.setViewport(zoom(this.viewport!, anchor, factor, this.extent()));
    });

    let dragFrom: number | null = null;
    this.canvas.addEventListener("pointerdown", (ev) => {
      dragFrom = ev.clientX;
      this.canvas.setPointerCapture(ev.pointerId);
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (dragFrom === null) return;
      const delta = dragFrom - ev.clientX; // drag left = move later in time
      dragFrom = ev.clientX;
      this.setViewport(pan(this.viewport!, delta, this.extent()));
    });
    this.canvas.addEventListener("pointerup", () => {
      dragFrom = null;
    });
    this.canvas.addEventListener("dblclick", () => {
      this.setViewport(overview(this.viewport!, this.extent()));
    });
  }
}

const base = new URLSearchParams(location.search).get("server") ?? "http://127.0.0.1:8787";
new ViewerApp(base).start().catch((err) => {
  const banner = document.getElementById("error-banner");
  if (banner) {
    banner.textContent = String(err);
    banner.hidden = false;
  }
});
