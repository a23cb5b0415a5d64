import init, { dephasingDemo, traceReplacementDemo, spinBosonDemo } from "./pkg/nonmarkov_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const NODES = 257;
let current = "dephasing";

const params = (id) => Object.fromEntries(
  [...document.querySelectorAll(`#${id} input`)].map((el) => [el.name, Number(el.value)]),
);

function run() {
  const p = params(current);
  let json;
  try {
    if (current === "dephasing") json = dephasingDemo(p.amplitude, p.offset, NODES);
    else if (current === "trace") json = traceReplacementDemo(p.amplitude, NODES);
    else json = spinBosonDemo(p.gamma0, p.lambda, p.tmax, 4 * NODES);
  } catch (e) {
    document.getElementById("summary").textContent = `error: ${e.message ?? e}`;
    return;
  }
  const r = JSON.parse(json);
  draw(r);
  const lines = [`markovian: ${r.markovian}`];
  for (const [k, v] of r.measures) lines.push(`${k}: ${v.toFixed(6)}`);
  for (const iv of r.verdict.violation_intervals) lines.push(`violation [${iv.t_start.toFixed(3)}, ${iv.t_end.toFixed(3)}]`);
  for (const iv of r.verdict.excluded_intervals) lines.push(`excluded [${iv.t_start.toFixed(3)}, ${iv.t_end.toFixed(3)}]`);
  document.getElementById("summary").textContent = lines.join("\n");
}

function draw(r) {
  const canvas = document.getElementById("plot");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);

  const all = r.curves.flatMap((c) => c.values);
  const ts = r.curves.flatMap((c) => c.times);
  let [lo, hi] = [Math.min(0, ...all), Math.max(0, ...all)];
  if (hi - lo < 1e-12) hi = lo + 1;
  const [t0, t1] = [Math.min(...ts), Math.max(...ts)];
  const x = (t) => pad + ((t - t0) / (t1 - t0)) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);

  ctx.fillStyle = "rgba(214, 39, 40, 0.12)";
  for (const iv of r.verdict.violation_intervals) ctx.fillRect(x(iv.t_start), pad, x(iv.t_end) - x(iv.t_start), h - 2 * pad);
  ctx.fillStyle = "rgba(0, 0, 0, 0.08)";
  for (const iv of r.verdict.excluded_intervals) ctx.fillRect(x(iv.t_start), pad, Math.max(2, x(iv.t_end) - x(iv.t_start)), h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad, y(0));
  ctx.lineTo(w - pad, y(0));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, pad);
  ctx.fillText(lo.toPrecision(3), 2, h - pad);
  ctx.fillText(`t = ${t0}`, pad, h - 10);
  ctx.fillText(`t = ${t1.toFixed(2)}`, w - pad - 60, h - 10);

  r.curves.forEach((c, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    c.times.forEach((t, k) => (k ? ctx.lineTo(x(t), y(c.values[k])) : ctx.moveTo(x(t), y(c.values[k]))));
    ctx.stroke();
  });

  document.getElementById("legend").innerHTML = r.curves
    .map((c, i) => `<span><i style="background:${COLORS[i % COLORS.length]}"></i>${c.label}</span>`)
    .join("");
}

for (const input of document.querySelectorAll("input")) {
  const out = input.nextElementSibling;
  out.value = input.value;
  input.addEventListener("input", () => {
    out.value = input.value;
    run();
  });
}

for (const b of document.querySelectorAll("nav button")) {
  b.addEventListener("click", () => {
    current = b.dataset.demo;
    document.querySelectorAll("nav button").forEach((x) => x.classList.toggle("active", x === b));
    document.querySelectorAll("section").forEach((s) => (s.hidden = s.id !== current));
    run();
  });
}

await init();
run();
