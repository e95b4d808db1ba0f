import init, { convex_profile, submodular_check, set_function_report } from "./pkg/extendkit_web.js";

const $ = (id) => document.getElementById(id);

function show(out, run) {
  try {
    const value = JSON.parse(run());
    out.className = "";
    out.textContent = JSON.stringify(value, null, 2);
    return value;
  } catch (e) {
    out.className = "err";
    out.textContent = String(e);
    return null;
  }
}

function plot(canvas, report) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const xs = report.profile.map((p) => p.x);
  const ys = report.profile.flatMap((p) => [p.tilde, p.roof]).filter((v) => v !== null)
    .concat(report.points.map((p) => p.value));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (x) => 20 + ((x - x0) / (x1 - x0)) * (width - 40);
  const py = (y) => height - 20 - ((y - y0) / (y1 - y0)) * (height - 40);
  const line = (key, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let open = false;
    for (const p of report.profile) {
      if (p[key] === null) { open = false; continue; }
      if (open) ctx.lineTo(px(p.x), py(p[key])); else ctx.moveTo(px(p.x), py(p[key]));
      open = true;
    }
    ctx.stroke();
  };
  line("tilde", "#c33");
  line("roof", "#36c");
  ctx.fillStyle = "#000";
  for (const p of report.points) {
    ctx.beginPath();
    ctx.arc(px(p.x), py(p.value), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

await init();

$("sf-run").onclick = () => show($("sf-out"), () => set_function_report($("sf-input").value));
$("sm-run").onclick = () => show($("sm-out"), () => submodular_check($("sm-input").value));
$("cv-run").onclick = () => {
  const lo = parseFloat($("cv-lo").value);
  const hi = parseFloat($("cv-hi").value);
  const report = show($("cv-out"), () => convex_profile($("cv-input").value, lo, hi, 121));
  if (report) plot($("cv-plot"), report);
};
