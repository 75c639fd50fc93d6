// SPDX-License-Identifier: MIT OR Apache-2.0

import init, { generateSignal, detect, noiseEstimates, seededLayers } from "./pkg/seedbs_wasm.js";

const $ = (id) => document.getElementById(id);

function syncOutputs() {
  for (const out of document.querySelectorAll("output[for]")) {
    out.textContent = $(out.htmlFor).value;
  }
}

function scale(lo, hi, a, b) {
  const span = hi - lo || 1;
  return (v) => a + ((v - lo) / span) * (b - a);
}

function drawSeries(canvas, { values, truth, fitted, changePoints }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values.concat(truth, fitted)) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const x = scale(0, values.length, 10, w - 10);
  const y = scale(lo, hi, h - 10, 10);

  ctx.fillStyle = "#999";
  values.forEach((v, i) => ctx.fillRect(x(i + 0.5) - 1, y(v) - 1, 2, 2));

  const step = (series, color, width) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    series.forEach((v, i) => {
      if (i === 0) ctx.moveTo(x(0), y(v));
      else ctx.lineTo(x(i), y(series[i - 1])), ctx.lineTo(x(i), y(v));
    });
    ctx.lineTo(x(series.length), y(series[series.length - 1]));
    ctx.stroke();
  };
  step(truth, "#2a7", 1.5);
  step(fitted, "#c33", 1.5);

  ctx.strokeStyle = "rgba(204,51,51,0.35)";
  ctx.lineWidth = 1;
  for (const b of changePoints) {
    ctx.beginPath();
    ctx.moveTo(x(b), h - 4);
    ctx.lineTo(x(b), h - 12);
    ctx.stroke();
  }
}

function drawLayers(canvas, layers, t) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const x = scale(0, t, 10, w - 10);
  const rowH = Math.max(2, Math.min(24, (h - 10) / layers.length));
  layers.forEach((layer, k) => {
    const hue = (k * 47) % 360;
    ctx.strokeStyle = `hsl(${hue} 60% 40%)`;
    const lanes = Math.max(1, Math.min(4, Math.floor(rowH / 3)));
    layer.forEach(([s, e], j) => {
      const yy = 5 + k * rowH + (j % lanes) * (rowH / lanes) + 1;
      ctx.beginPath();
      ctx.moveTo(x(s), yy);
      ctx.lineTo(x(e), yy);
      ctx.stroke();
    });
  });
}

let signal = null;

function regenerate() {
  const seg = Number($("seglen").value);
  let count = Number($("segments").value);
  if (seg * count > 20000) count = Math.floor(20000 / seg);
  signal = JSON.parse(
    generateSignal($("kind").value, seg, count, Number($("sigma").value), BigInt($("seed").value || 0))
  );
  redetect();
  renderNoise();
}

function redetect() {
  const summary = $("summary");
  summary.classList.remove("err");
  try {
    const values = Float64Array.from(signal.values);
    const out = JSON.parse(
      detect(
        values,
        $("selection").value,
        $("noise").value,
        $("model").value,
        Number($("c").value),
        Number($("decay").value),
        Number($("augment").value),
        Number($("m").value),
        BigInt($("seed").value || 0)
      )
    );
    drawSeries($("plot"), {
      values: signal.values,
      truth: signal.truth,
      fitted: out.fitted,
      changePoints: out.change_points,
    });
    const hits = out.change_points.filter((b) => signal.change_points.includes(b)).length;
    summary.textContent =
      `${out.label}: T = ${signal.values.length}, sigma_hat = ${out.sigma_hat.toFixed(4)}, ` +
      `threshold/criterion = ${out.threshold_or_criterion === null ? "-" : out.threshold_or_criterion.toFixed(4)}\n` +
      `detected ${out.change_points.length} of ${signal.change_points.length} true change points ` +
      `(${hits} at the exact location)`;
  } catch (e) {
    summary.classList.add("err");
    summary.textContent = String(e);
  }
}

function renderNoise() {
  const est = JSON.parse(noiseEstimates(Float64Array.from(signal.values)));
  $("noise-out").textContent = est
    .map((e) => {
      const name = e.lags ? `${e.method}(${e.lags.join(",")})` : e.method;
      return `${name.padEnd(16)} sigma = ${e.sigma.toFixed(4)}   sigma^2 = ${e.sigma2.toFixed(5)}`;
    })
    .join("\n");
}

function renderLayers() {
  const t = Number($("layer-t").value);
  const out = $("layer-summary");
  out.classList.remove("err");
  try {
    const layers = JSON.parse(
      seededLayers(t, Number($("layer-decay").value), Number($("layer-min").value))
    );
    drawLayers($("layers"), layers, t);
    const total = layers.reduce((n, l) => n + l.length, 0);
    const length = layers.flat().reduce((n, [s, e]) => n + (e - s), 0);
    out.textContent =
      `${layers.length} layers, ${total} intervals (before de-duplication), total length ${length}\n` +
      layers.map((l, k) => `layer ${k}: ${l.length} x length ${l[0][1] - l[0][0]}`).join("\n");
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
  }
}

await init();
syncOutputs();
document.addEventListener("input", (ev) => {
  syncOutputs();
  const id = ev.target.id;
  if (["kind", "seglen", "segments", "sigma", "seed"].includes(id)) regenerate();
  else if (id.startsWith("layer")) renderLayers();
  else redetect();
});
regenerate();
renderLayers();
