import init, { densityHeatmap, recoverPolygon, estimateScatter } from "./pkg/ptransform_demo.js";

const $ = (id) => document.getElementById(id);

function numbers(text, width) {
  const rows = text.split("\n").map((l) => l.trim()).filter((l) => l.length > 0);
  const flat = [];
  rows.forEach((row, i) => {
    const vals = row.split(/\s+/).map(Number);
    if (vals.length !== width || vals.some((v) => !Number.isFinite(v))) {
      throw new Error(`line ${i + 1}: expected ${width} numbers`);
    }
    flat.push(...vals);
  });
  return new Float64Array(flat);
}

function sigmaSlider(id) {
  const show = () => ($(`${id}-v`).textContent = (10 ** Number($(id).value)).toExponential(1));
  $(id).addEventListener("input", show);
  show();
  return () => 10 ** Number($(id).value);
}

// Maps the square [-half, half]^2 around (cx, cy) onto a canvas.
function view(canvas, cx, cy, half) {
  const s = canvas.width / (2 * half);
  return {
    x: (re) => (re - cx + half) * s,
    y: (im) => canvas.height - (im - cy + half) * s,
    scale: s,
  };
}

function axes(ctx, v, canvas) {
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(v.x(0), 0);
  ctx.lineTo(v.x(0), canvas.height);
  ctx.moveTo(0, v.y(0));
  ctx.lineTo(canvas.width, v.y(0));
  ctx.stroke();
}

function unitCircle(ctx, v) {
  ctx.strokeStyle = "rgba(255,255,255,0.6)";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(v.x(0), v.y(0), v.scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
}

function ring(ctx, x, y, r, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.stroke();
}

function cross(ctx, x, y, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(x - 5, y - 5);
  ctx.lineTo(x + 5, y + 5);
  ctx.moveTo(x - 5, y + 5);
  ctx.lineTo(x + 5, y - 5);
  ctx.stroke();
  ctx.lineWidth = 1;
}

function heat(t) {
  const r = Math.round(255 * Math.min(1, 1.8 * t));
  const g = Math.round(255 * Math.max(0, Math.min(1, 2 * t - 0.4)));
  const b = Math.round(255 * Math.max(0, 0.5 - t) + 255 * Math.max(0, t - 0.8) * 4);
  return [r, g, Math.min(255, b)];
}

function report(id, fn) {
  try {
    $(id).classList.remove("err");
    $(id).textContent = fn();
  } catch (e) {
    $(id).classList.add("err");
    $(id).textContent = String(e.message ?? e);
  }
}

function drawDensity(getSigma) {
  report("d-out", () => {
    const model = numbers($("d-model").value, 4);
    const n = Number($("d-n").value);
    const points = Number($("d-points").value);
    const half = 1.6;
    const t0 = performance.now();
    const values = densityHeatmap(model, n, getSigma(), half, points);
    const ms = performance.now() - t0;

    const canvas = $("d-canvas");
    const ctx = canvas.getContext("2d");
    const max = values.reduce((m, x) => Math.max(m, x), 0) || 1;
    const img = ctx.createImageData(points, points);
    for (let iy = 0; iy < points; iy++) {
      for (let ix = 0; ix < points; ix++) {
        const t = Math.sqrt(Math.max(0, values[iy * points + ix]) / max);
        const [r, g, b] = heat(t);
        const k = 4 * ((points - 1 - iy) * points + ix);
        img.data.set([r, g, b, 255], k);
      }
    }
    const tmp = new OffscreenCanvas(points, points);
    tmp.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
    const v = view(canvas, 0, 0, half);
    unitCircle(ctx, v);
    for (let j = 0; j < model.length; j += 4) ring(ctx, v.x(model[j + 2]), v.y(model[j + 3]), 6, "#0cf");
    const mass = values.reduce((s, x) => s + x, 0) * (2 * half / (points - 1)) ** 2;
    return `total mass ${mass.toFixed(3)}\n${points}x${points} lattice in ${ms.toFixed(0)} ms`;
  });
}

function drawShape(getSigma) {
  report("s-out", () => {
    const truth = numbers($("s-vertices").value, 2);
    const t0 = performance.now();
    const found = recoverPolygon(truth, Number($("s-count").value), getSigma(), 32, BigInt($("s-seed").value));
    const ms = performance.now() - t0;

    const canvas = $("s-canvas");
    const ctx = canvas.getContext("2d");
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    let cx = 0, cy = 0;
    for (let j = 0; j < truth.length; j += 2) { cx += truth[j]; cy += truth[j + 1]; }
    cx /= truth.length / 2; cy /= truth.length / 2;
    let half = 0.2;
    for (let j = 0; j < truth.length; j += 2) {
      half = Math.max(half, 1.4 * Math.abs(truth[j] - cx), 1.4 * Math.abs(truth[j + 1] - cy));
    }
    const v = view(canvas, cx, cy, half);
    axes(ctx, v, canvas);
    ctx.strokeStyle = "#444";
    ctx.beginPath();
    for (let j = 0; j < truth.length; j += 2) ctx.lineTo(v.x(truth[j]), v.y(truth[j + 1]));
    ctx.closePath();
    ctx.stroke();
    ctx.fillStyle = "#d33";
    const lines = [];
    for (let j = 0; j < found.length; j += 2) {
      ctx.beginPath();
      ctx.arc(v.x(found[j]), v.y(found[j + 1]), 4, 0, 2 * Math.PI);
      ctx.fill();
      lines.push(`${found[j].toFixed(5)} ${found[j + 1].toFixed(5)}`);
    }
    return `${lines.join("\n")}\n${ms.toFixed(0)} ms`;
  });
}

function drawScatter(getSigma) {
  report("e-out", () => {
    const model = numbers($("e-model").value, 4);
    const t0 = performance.now();
    const sv = estimateScatter(
      model,
      Number($("e-n").value),
      getSigma(),
      Number($("e-r").value),
      Number($("e-p").value),
      BigInt($("e-seed").value),
    );
    const ms = performance.now() - t0;
    const members = sv.members;
    const est = sv.estimates;
    const pHat = sv.p_hat;
    sv.free();

    const canvas = $("e-canvas");
    const ctx = canvas.getContext("2d");
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const v = view(canvas, 0, 0, 1.4);
    axes(ctx, v, canvas);
    ctx.strokeStyle = "#bbb";
    ctx.beginPath();
    ctx.arc(v.x(0), v.y(0), v.scale, 0, 2 * Math.PI);
    ctx.stroke();
    for (let j = 0; j < members.length; j += 3) {
      ctx.fillStyle = members[j + 2] > 0 ? "rgba(30,120,220,0.6)" : "rgba(120,120,120,0.35)";
      ctx.fillRect(v.x(members[j]) - 1.5, v.y(members[j + 1]) - 1.5, 3, 3);
    }
    for (let j = 0; j < model.length; j += 4) ring(ctx, v.x(model[j + 2]), v.y(model[j + 3]), 8, "#090");
    const lines = [`p_hat ${pHat}`];
    for (let j = 0; j < est.length; j += 4) {
      cross(ctx, v.x(est[j + 2]), v.y(est[j + 3]), "#d33");
      lines.push(`c ${est[j].toFixed(3)}${est[j + 1] >= 0 ? "+" : ""}${est[j + 1].toFixed(3)}i  xi ${est[j + 2].toFixed(3)}${est[j + 3] >= 0 ? "+" : ""}${est[j + 3].toFixed(3)}i`);
    }
    lines.push(`${ms.toFixed(0)} ms`);
    return lines.join("\n");
  });
}

await init();
const dSigma = sigmaSlider("d-sigma");
const sSigma = sigmaSlider("s-sigma");
const eSigma = sigmaSlider("e-sigma");
$("d-run").addEventListener("click", () => drawDensity(dSigma));
$("s-run").addEventListener("click", () => drawShape(sSigma));
$("e-run").addEventListener("click", () => drawScatter(eSigma));
$("s-preset").addEventListener("change", (e) => {
  $("s-vertices").value = e.target.value.replaceAll("\\n", "\n");
  drawShape(sSigma);
});
drawDensity(dSigma);
drawShape(sSigma);
drawScatter(eSigma);
