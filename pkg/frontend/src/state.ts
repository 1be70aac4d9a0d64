// Shareable view state: everything the explorer shows is a pure function of
// this record, and the record round-trips through the URL fragment.

export type ViewName = "path" | "tail" | "gof";

export interface ViewState {
  dataset: string;
  methods: string[];      // method ids drawn in the overlay
  kFocus: number;         // focused threshold rank for tail readouts
  a: number;              // Bernstein degree exponent (tbar tracks, gof)
  m: number;              // Bernstein degree (ebar tracks)
  kstar: number;          // rank anchoring the nonparametric bias
  rho: number;            // power-bias rate (ep+)
  rhoTilde: number;       // second-order rate (ep)
  ciLevel: number;        // 0 disables bands
  smooth: number;         // odd moving-average window, 1 = raw
  xi0: number;            // gof starting shape
  sigma0: number;         // gof starting scale
  view: ViewName;
}

export const DEFAULT_STATE: ViewState = {
  dataset: "demo-claims",
  methods: ["pareto-ml", "ep+"],
  kFocus: 100,
  a: 0.7,
  m: 25,
  kstar: 100,
  rho: -0.5,
  rhoTilde: -1,
  ciLevel: 0.95,
  smooth: 1,
  xi0: 0.5,
  sigma0: 1,
  view: "path",
};

const NUMERIC_KEYS = [
  "kFocus", "a", "m", "kstar", "rho", "rhoTilde", "ciLevel", "smooth", "xi0", "sigma0",
] as const;

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("dataset", state.dataset);
  params.set("methods", state.methods.join(","));
  params.set("view", state.view);
  for (const key of NUMERIC_KEYS) {
    params.set(key, String(state[key]));
  }
  return params.toString();
}

export function decodeState(fragment: string): ViewState {
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const state: ViewState = { ...DEFAULT_STATE, methods: [...DEFAULT_STATE.methods] };
  const dataset = params.get("dataset");
  if (dataset) state.dataset = dataset;
  const methods = params.get("methods");
  if (methods !== null) {
    state.methods = methods === "" ? [] : methods.split(",");
  }
  const view = params.get("view");
  if (view === "path" || view === "tail" || view === "gof") state.view = view;
  for (const key of NUMERIC_KEYS) {
    const raw = params.get(key);
    if (raw === null) continue;
    const value = Number(raw);
    if (Number.isFinite(value)) state[key] = value;
  }
  return state;
}

// hyperparameters each method actually consumes, mirroring the server grids
export function methodParams(method: string, state: ViewState): Record<string, number> {
  switch (method) {
    case "ep+": return { rho: state.rho };
    case "ep": return { rho_tilde: state.rhoTilde };
    case "ebar":
    case "ebar+": return { kstar: state.kstar, m: state.m };
    case "tbar":
    case "tbar+": return { a: state.a };
    default: return {};
  }
}
