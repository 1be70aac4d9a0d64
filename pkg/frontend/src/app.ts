// Explorer wiring: sliders and method toggles drive server-side refits; the
// browser only draws what the service returns.

import { ApiClient, DatasetSummary, LatestWins, PathEntry, PathResponse } from "./api.js";
import { clearSvg, renderPathOverlay, renderPpScatter, Series } from "./plot.js";
import { DEFAULT_STATE, ViewState, decodeState, encodeState, methodParams } from "./state.js";

const METHOD_IDS = ["pareto-ml", "gpd-ml", "ep", "ep+", "ebar", "ebar+", "tbar", "tbar+"];
const COLORS: Record<string, string> = {
  "pareto-ml": "#111111", "gpd-ml": "#555555", ep: "#c0392b", "ep+": "#e67e22",
  ebar: "#8e44ad", "ebar+": "#2980b9", tbar: "#16a085", "tbar+": "#27ae60",
};

interface Slider {
  key: keyof ViewState;
  label: string;
  min: number;
  max: number;
  step: number;
}

const SLIDERS: Slider[] = [
  { key: "kFocus", label: "k focus", min: 5, max: 495, step: 1 },
  { key: "a", label: "degree exponent a", min: 0.3, max: 0.99, step: 0.01 },
  { key: "m", label: "Bernstein degree m", min: 2, max: 150, step: 1 },
  { key: "kstar", label: "bias anchor k*", min: 10, max: 400, step: 1 },
  { key: "rho", label: "power-bias rate rho", min: -2, max: -0.1, step: 0.05 },
  { key: "rhoTilde", label: "second-order rate", min: -2, max: -0.1, step: 0.05 },
  { key: "ciLevel", label: "CI level", min: 0, max: 0.99, step: 0.01 },
  { key: "smooth", label: "smoothing window", min: 1, max: 21, step: 2 },
  { key: "xi0", label: "gof xi0", min: -0.4, max: 1.5, step: 0.01 },
  { key: "sigma0", label: "gof sigma0", min: 0.05, max: 100, step: 0.05 },
];

export interface AppHandles {
  state: () => ViewState;
  setState: (patch: Partial<ViewState>) => void;
  refresh: () => Promise<void>;
  root: HTMLElement;
}

export interface AppOptions {
  debounceMs?: number;
  window?: Pick<Window, "location" | "history">;
}

function pathSeries(responses: PathResponse[], state: ViewState,
                    pick: (entry: PathEntry) => number | null): Series[] {
  const out: Series[] = [];
  for (const res of responses) {
    const points: [number, number][] = [];
    const band: [number, number, number][] = [];
    for (const entry of res.entries) {
      const value = pick(entry);
      if (value === null || !entry.converged) continue;
      points.push([entry.k, value]);
      if (entry.ci) band.push([entry.k, entry.ci[0], entry.ci[1]]);
    }
    out.push({
      label: res.label,
      color: COLORS[res.method] ?? "#000",
      points,
      band: state.ciLevel > 0 && band.length > 1 ? band : undefined,
    });
  }
  return out;
}

export function createApp(root: HTMLElement, client: ApiClient,
                          options: AppOptions = {}): AppHandles {
  const debounceMs = options.debounceMs ?? 150;
  const win = options.window ?? window;
  let state = decodeState(win.location.hash || "");
  let datasets: DatasetSummary[] = [];
  const latest = new LatestWins();
  let timer: ReturnType<typeof setTimeout> | null = null;

  root.innerHTML = `
    <header>
      <h1>tailforge explorer</h1>
      <div id="status" class="status"></div>
    </header>
    <section class="controls">
      <label>dataset <select id="dataset"></select></label>
      <div id="methods" class="methods"></div>
      <div id="sliders" class="sliders"></div>
      <nav id="views">
        <button data-view="path">shape path</button>
        <button data-view="tail">tail probability</button>
        <button data-view="gof">goodness of fit</button>
      </nav>
      <button id="assist">min-variance assist</button>
      <span id="assist-result"></span>
    </section>
    <section class="plot">
      <div id="badge" class="badge"></div>
      <svg id="chart" role="img"></svg>
      <div id="legend" class="legend"></div>
    </section>
  `;

  const chart = root.querySelector<SVGSVGElement>("#chart")!;
  const status = root.querySelector<HTMLElement>("#status")!;
  const badge = root.querySelector<HTMLElement>("#badge")!;
  const legend = root.querySelector<HTMLElement>("#legend")!;

  const datasetSelect = root.querySelector<HTMLSelectElement>("#dataset")!;
  datasetSelect.addEventListener("change", () => {
    update({ dataset: datasetSelect.value });
  });

  const methodsBox = root.querySelector<HTMLElement>("#methods")!;
  for (const id of METHOD_IDS) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = id;
    box.dataset.method = id;
    box.addEventListener("change", () => {
      const enabled = Array.from(methodsBox.querySelectorAll<HTMLInputElement>("input"))
        .filter((cb) => cb.checked)
        .map((cb) => cb.value);
      update({ methods: enabled });
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(id));
    methodsBox.appendChild(label);
  }

  const slidersBox = root.querySelector<HTMLElement>("#sliders")!;
  const sliderInputs = new Map<string, HTMLInputElement>();
  for (const spec of SLIDERS) {
    const wrap = document.createElement("label");
    wrap.textContent = spec.label + " ";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.dataset.param = spec.key;
    const readout = document.createElement("output");
    input.addEventListener("input", () => {
      readout.value = input.value;
      update({ [spec.key]: Number(input.value) } as Partial<ViewState>);
    });
    wrap.appendChild(input);
    wrap.appendChild(readout);
    slidersBox.appendChild(wrap);
    sliderInputs.set(spec.key, input);
  }

  for (const button of root.querySelectorAll<HTMLButtonElement>("#views button")) {
    button.addEventListener("click", () => update({ view: button.dataset.view as ViewState["view"] }));
  }

  root.querySelector<HTMLButtonElement>("#assist")!.addEventListener("click", async () => {
    const target = state.methods.find((m) => m !== "pareto-ml" && m !== "gpd-ml") ?? "ep+";
    try {
      const res = await client.fetchMinvar(state.dataset, target);
      const patch: Partial<ViewState> = {};
      const sel = res.selected;
      if (typeof sel.rho === "number") patch.rho = sel.rho;
      if (typeof sel.rho_tilde === "number") patch.rhoTilde = sel.rho_tilde;
      if (typeof sel.a === "number") patch.a = sel.a;
      if (typeof sel.kstar === "number") patch.kstar = sel.kstar;
      if (typeof sel.m === "number") patch.m = sel.m;
      root.querySelector<HTMLElement>("#assist-result")!.textContent =
        `recommended: ${JSON.stringify(res.selected)}`;
      update(patch);
    } catch (err) {
      showError(err);
    }
  });

  function syncControls(): void {
    datasetSelect.innerHTML = "";
    for (const ds of datasets) {
      const opt = document.createElement("option");
      opt.value = ds.id;
      opt.textContent = `${ds.name} (n=${ds.n})`;
      datasetSelect.appendChild(opt);
    }
    datasetSelect.value = state.dataset;
    for (const cb of methodsBox.querySelectorAll<HTMLInputElement>("input")) {
      cb.checked = state.methods.includes(cb.value);
    }
    for (const [key, input] of sliderInputs) {
      input.value = String(state[key as keyof ViewState]);
      (input.nextSibling as HTMLOutputElement).value = input.value;
    }
  }

  function writeUrl(): void {
    win.history.replaceState(null, "", "#" + encodeState(state));
  }

  function showError(err: unknown): void {
    status.textContent = String(err instanceof Error ? err.message : err);
    status.classList.add("error");
  }

  function update(patch: Partial<ViewState>): void {
    state = { ...state, ...patch };
    writeUrl();
    syncControls();
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      void refresh();
    }, debounceMs);
  }

  async function refresh(): Promise<void> {
    status.textContent = "fetching";
    status.classList.remove("error");
    try {
      const drawn = await latest.run(() => fetchView());
      if (drawn !== null) {
        status.textContent = "";
      }
    } catch (err) {
      showError(err);
    }
  }

  async function fetchView(): Promise<boolean> {
    badge.textContent = "";
    if (state.view === "gof") {
      const res = await client.fetchGof(state.dataset, state.xi0, state.sigma0, state.a);
      renderPpScatter(chart, res.points);
      // the badge shows the service correlation verbatim
      badge.textContent = `correlation ${res.correlation}`;
      legend.textContent = "";
      return true;
    }
    const info = datasets.find((d) => d.id === state.dataset);
    const maxObs = info ? (info as DatasetSummary & { max?: number }).max : undefined;
    const responses: PathResponse[] = [];
    for (const method of state.methods) {
      responses.push(await client.fetchPath(state.dataset, method, methodParams(method, state), {
        ci: state.view === "path" ? state.ciLevel : 0,
        smooth: state.smooth,
        ...(state.view === "tail" && maxObs !== undefined ? { c: maxObs } : {}),
      }));
    }
    if (state.view === "tail") {
      const key = maxObs !== undefined ? String(maxObs) : "";
      const series = pathSeries(responses, state, (e) => {
        const tail = e.tail ?? {};
        const hit = tail[key] ?? Object.values(tail)[0] ?? null;
        return hit ?? null;
      });
      const n = info ? info.n : 1;
      renderPathOverlay(chart, series, 1 / n);
    } else {
      renderPathOverlay(chart, pathSeries(responses, state, (e) => e.xi));
    }
    legend.textContent = responses.map((r) => r.label).join("   ");
    return true;
  }

  async function boot(): Promise<void> {
    try {
      const listing = await client.listDatasets();
      datasets = listing.datasets;
      if (!datasets.some((d) => d.id === state.dataset) && datasets.length > 0) {
        state = { ...state, dataset: datasets[0].id };
      }
    } catch (err) {
      showError(err);
    }
    syncControls();
    writeUrl();
    await refresh();
  }

  void boot();

  return {
    state: () => state,
    setState: update,
    refresh,
    root,
  };
}
