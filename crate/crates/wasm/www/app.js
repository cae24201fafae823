import init, { scenario_curves, run_test, sample_directions } from "./pkg/condroc_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728"];

function study() {
  return {
    scenarios: $("scenarios").value.split(","),
    n_f: Number($("nf").value),
    n_g: Number($("ng").value),
    rho: Number($("rho").value),
    seed: Number($("seed").value),
  };
}

function call(fn, request) {
  $("status").textContent = "";
  $("status").className = "";
  try {
    return JSON.parse(fn(JSON.stringify(request)));
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
    $("status").className = "err";
    return null;
  }
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

function line(ctx, xs, ys, map, color, dash) {
  ctx.strokeStyle = color;
  ctx.setLineDash(dash ?? []);
  ctx.beginPath();
  xs.forEach((x, i) => {
    const [px, py] = map(x, ys[i]);
    i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawCurves() {
  const out = call(scenario_curves, { ...study(), grid: 101 });
  if (!out) return;
  const c = $("curves");
  const ctx = c.getContext("2d");
  const pad = 20;
  const s = c.width - 2 * pad;
  axes(ctx, c.width, c.height, pad);
  const map = (p, r) => [pad + p * s, pad + (1 - r) * s];
  line(ctx, [0, 1], [0, 1], map, "#ccc");
  out.markers.forEach((m, k) => {
    line(ctx, out.p, m.true_roc, map, COLORS[k], [5, 4]);
    line(ctx, out.p, m.estimated_roc, map, COLORS[k]);
  });
  const fmt = (v) => v.map((t) => t.toFixed(3)).join(", ");
  $("curves-info").innerHTML =
    `x = (${fmt(out.x)}); dashed: true curve at x, solid: estimate along &beta;<sub>F</sub> = (${fmt(out.beta_f)}), ` +
    `&beta;<sub>G</sub> = (${fmt(out.beta_g)})<br>` +
    out.markers
      .map((m, k) => `<span style="color:${COLORS[k]}">${m.scenario}: a = ${m.a.toFixed(3)}, b = ${m.b.toFixed(3)}; ` +
        `fitted a = ${m.a_hat.toFixed(3)}, b = ${m.b_hat.toFixed(3)}</span>`)
      .join("<br>");
}

function histogram(canvas, values, observed) {
  const ctx = canvas.getContext("2d");
  const pad = 20;
  axes(ctx, canvas.width, canvas.height, pad);
  const hi = Math.max(observed, ...values) * 1.05 || 1;
  const bins = 30;
  const counts = new Array(bins).fill(0);
  values.forEach((v) => counts[Math.min(bins - 1, Math.floor((v / hi) * bins))]++);
  const top = Math.max(...counts) || 1;
  const w = (canvas.width - 2 * pad) / bins;
  const h = canvas.height - 2 * pad;
  ctx.fillStyle = "#9ecae1";
  counts.forEach((n, i) => ctx.fillRect(pad + i * w, pad + h * (1 - n / top), w - 1, (h * n) / top));
  ctx.strokeStyle = "#d62728";
  const x = pad + (observed / hi) * (canvas.width - 2 * pad);
  ctx.beginPath();
  ctx.moveTo(x, pad);
  ctx.lineTo(x, pad + h);
  ctx.stroke();
}

function runTest() {
  $("test-out").textContent = "running...";
  // let the label paint before the blocking call
  setTimeout(() => {
    const out = call(run_test, {
      ...study(),
      b: Number($("b").value),
      n_beta: Number($("nbeta").value),
      m_beta: Number($("mbeta").value),
      mode: $("mode").value,
    });
    if (!out) {
      $("test-out").textContent = "";
      return;
    }
    histogram($("boot"), out.l2.bootstrap_stats, out.l2.statistic);
    $("test-out").textContent = ["l2", "ks"]
      .map((k) => `${k}: statistic ${out[k].statistic.toFixed(4)}, p-value ${out[k].p_value.toFixed(3)}, ` +
        `B used ${out[k].B_effective}, direction pairs ${out[k].pair_statistics.length}`)
      .join("\n");
  }, 10);
}

function drawDirections() {
  const out = call(sample_directions, {
    d: 2,
    mode: "paired",
    count: Number($("count").value),
    seed: Number($("seed").value),
  });
  if (!out) return;
  const c = $("dirs");
  const ctx = c.getContext("2d");
  const r = c.width / 2 - 20;
  const o = c.width / 2;
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.arc(o, o, r, 0, 2 * Math.PI);
  ctx.stroke();
  [out.diseased, out.healthy].forEach((dirs, k) => {
    ctx.strokeStyle = COLORS[k];
    dirs.forEach(([x, y]) => {
      ctx.beginPath();
      ctx.moveTo(o, o);
      ctx.lineTo(o + x * r, o - y * r);
      ctx.stroke();
    });
  });
}

await init();
$("curves-btn").onclick = drawCurves;
$("test-btn").onclick = runTest;
$("dir-btn").onclick = drawDirections;
drawCurves();
drawDirections();
