import init, { sequenceReport, smoothingCurve, exponentTable } from "./pkg/gprand_web.js";

const $ = (id) => document.getElementById(id);

function fail(target, e) {
  target.innerHTML = `<p class="err">${String(e)}</p>`;
}

function plot(canvas, series, colors) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const all = series.flat();
  let lo = Math.min(...all), hi = Math.max(...all);
  if (lo === hi) { lo -= 1; hi += 1; }
  const y = (v) => h - 4 - ((v - lo) / (hi - lo)) * (h - 8);
  if (lo < 0 && hi > 0) {
    ctx.strokeStyle = "#bbb";
    ctx.beginPath(); ctx.moveTo(0, y(0)); ctx.lineTo(w, y(0)); ctx.stroke();
  }
  series.forEach((s, k) => {
    ctx.strokeStyle = colors[k];
    ctx.beginPath();
    s.forEach((v, i) => {
      const x = (i / Math.max(1, s.length - 1)) * w;
      i ? ctx.lineTo(x, y(v)) : ctx.moveTo(x, y(v));
    });
    ctx.stroke();
  });
}

function runSequence() {
  const out = $("seq-out");
  try {
    const r = JSON.parse(sequenceReport($("expr").value, Number($("n").value)));
    const wt = r.witness;
    out.innerHTML =
      `<p>W = <b>${r.w}</b> (a = ${wt.a}, b = ${wt.b}, M = ${wt.m}, U = ${wt.u}),
       W/N = ${(r.w / r.n).toFixed(4)}, D<sub>N</sub>({f(n)}) = ${r.d.toFixed(6)}</p>
       <pre>${r.signs}${r.n > 256 ? "…" : ""}</pre>`;
    plot($("walk"), [r.walk], ["#2a6"]);
  } catch (e) {
    fail(out, e);
  }
}

function runSmoothing() {
  const out = $("smooth-out");
  try {
    const r = JSON.parse(smoothingCurve(
      Number($("r").value), Number($("delta").value), Number($("tau").value), Number($("k").value), 600));
    out.innerHTML = `<p>real parts: F (grey), G<sub>r</sub> (blue); truncation scale (δK)<sup>−r</sup> = ${r.errorScale.toExponential(2)}</p>`;
    plot($("curve"), [r.f.map((z) => z[0]), r.g.map((z) => z[0])], ["#999", "#26c"]);
  } catch (e) {
    fail(out, e);
  }
}

function runExponents() {
  const out = $("exp-out");
  try {
    const rows = JSON.parse(exponentTable(Number($("dmax").value), $("t").value));
    const cells = (p) => `<td>${p[0]}</td><td>${p[1]}</td>`;
    out.innerHTML =
      `<table><tr><th>d</th><th colspan=2>prop 1 (a, N)</th><th colspan=2>prop 2</th>
       <th colspan=2>prop 3</th><th>threshold</th><th>η</th></tr>` +
      rows.map((r) => `<tr><td>${r.d}</td>${cells(r.prop1)}${cells(r.prop2)}${cells(r.prop3)}
        <td>${r.threshold}</td><td>${r.eta}</td></tr>`).join("") +
      `</table>`;
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("run-seq").onclick = runSequence;
$("run-smooth").onclick = runSmoothing;
$("run-exp").onclick = runExponents;
runSequence();
runSmoothing();
runExponents();
