import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { parseSummary } from "../src/csv.js";
import { run } from "../src/main.js";
import { renderFigure } from "../src/plot.js";

const FIXTURE = join(__dirname, "..", "fixtures", "summary_online.csv");

function syntheticSummary(rounds: number, learners: string[], zeroStd = false): string {
  const lines = ["learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds"];
  for (const learner of learners) {
    let cum = 0;
    for (let t = 1; t <= rounds; t++) {
      const step = 1 / (t + learners.indexOf(learner));
      cum += step;
      const std = zeroStd ? 0 : 0.1 * step;
      lines.push(`${learner},${t},${step},${std},${cum},${std * 2},5`);
    }
  }
  return lines.join("\n") + "\n";
}

describe("renderFigure", () => {
  it("renders the committed experiment summary without error", () => {
    const rows = parseSummary(readFileSync(FIXTURE, "utf8"));
    const png = renderFigure(rows, { groupBy: "learner" });
    expect(png.length).toBeGreaterThan(2000);
    expect(png.subarray(1, 4).toString("ascii")).toBe("PNG");
  });

  it("rerendering the same input is byte-stable", () => {
    const rows = parseSummary(readFileSync(FIXTURE, "utf8"));
    const a = renderFigure(rows, { groupBy: "learner" });
    const b = renderFigure(rows, { groupBy: "learner" });
    expect(a.equals(b)).toBe(true);
  });

  it("handles a single-learner single-round summary", () => {
    const rows = parseSummary(syntheticSummary(1, ["solo"]));
    const png = renderFigure(rows, { groupBy: "learner" });
    expect(png.length).toBeGreaterThan(500);
  });

  it("collapses bands when every std is zero", () => {
    const wide = renderFigure(parseSummary(syntheticSummary(50, ["a"], false)), {
      groupBy: "learner",
    });
    const flat = renderFigure(parseSummary(syntheticSummary(50, ["a"], true)), {
      groupBy: "learner",
    });
    expect(flat.length).toBeLessThan(wide.length); // less shaded area compresses better
  });

  it("groups eta-keyed summaries", () => {
    const lines = ["eta,learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds"];
    for (const eta of [1, 2, 3]) {
      for (let t = 1; t <= 20; t++) {
        lines.push(`${eta},greedy,${t},${eta / t},0.01,${eta * Math.log(t + 1)},0.05,5`);
      }
    }
    const png = renderFigure(parseSummary(lines.join("\n")), { groupBy: "eta" });
    expect(png.length).toBeGreaterThan(1000);
  });
});

describe("command line", () => {
  it("renders a file and exits zero", () => {
    const dir = mkdtempSync(join(tmpdir(), "klpref-plots-"));
    const input = join(dir, "summary.csv");
    writeFileSync(input, syntheticSummary(30, ["greedy", "bonus"]));
    const output = join(dir, "fig.png");
    const code = run(["--input", input, "--group-by", "learner", "--output", output]);
    expect(code).toBe(0);
    const png = readFileSync(output);
    expect(png.subarray(1, 4).toString("ascii")).toBe("PNG");

    // second render into another file is identical
    const output2 = join(dir, "fig2.png");
    expect(run(["--input", input, "--group-by", "learner", "--output", output2])).toBe(0);
    expect(readFileSync(output2).equals(png)).toBe(true);
  });

  it("reports schema errors with exit code 1", () => {
    const dir = mkdtempSync(join(tmpdir(), "klpref-plots-"));
    const input = join(dir, "bad.csv");
    writeFileSync(input, "learner,t,oops\na,1,2\n");
    expect(run(["--input", input, "--output", join(dir, "x.png")])).toBe(1);
  });

  it("rejects bad flags with exit code 2", () => {
    expect(run(["--input"])).toBe(2);
    expect(run(["--frobnicate", "x"])).toBe(2);
    expect(run(["--input", "a.csv", "--group-by", "color", "--output", "b.png"])).toBe(2);
  });
});
