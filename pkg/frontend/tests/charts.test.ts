import { describe, expect, it } from "vitest";

import { SummaryPayload, TimelineEntry } from "../src/api.js";
import { renderCountsBarChart, renderTimelineScatter } from "../src/charts.js";
import summaryFixture from "./fixtures/summary.json";
import timelineFixture from "./fixtures/timeline.json";

const summary = summaryFixture as SummaryPayload;
const timeline = timelineFixture as TimelineEntry[];

describe("counts bar chart", () => {
  it("DOM-extracted bar heights equal payload counts exactly", () => {
    const chart = renderCountsBarChart(summary);
    const bars = [...chart.querySelectorAll("rect")];
    const positive = Object.keys(summary.counts)
      .filter((fid) => summary.counts[fid] > 0);
    expect(bars.length).toBe(positive.length);
    for (const bar of bars) {
      const fid = bar.getAttribute("data-feature")!;
      expect(bar.getAttribute("height")).toBe(String(summary.counts[fid]));
      expect(Number(bar.getAttribute("data-value"))).toBe(summary.counts[fid]);
    }
  });

  it("renders a bar of height 3 for a count of 3", () => {
    const chart = renderCountsBarChart({
      lecture_id: "x", counts: { asking_questions: 3 }, durations: {},
      source: "model", model_id: "m",
    });
    const bar = chart.querySelector("rect[data-feature=asking_questions]")!;
    expect(bar.getAttribute("height")).toBe("3");
    const label = chart.querySelector("figcaption span")!;
    expect(label.textContent).toBe("Asking questions (3)");
  });

  it("empty counts render an explicit empty state", () => {
    const chart = renderCountsBarChart({
      lecture_id: "x", counts: {}, durations: {}, source: "model",
      model_id: null,
    });
    expect(chart.querySelector(".empty-state")).not.toBeNull();
    expect(chart.querySelector("rect")).toBeNull();
  });
});

describe("timeline scatter", () => {
  it("point x-coordinates equal payload minutes exactly", () => {
    const chart = renderTimelineScatter(timeline);
    const marks = [...chart.querySelectorAll("circle")];
    expect(marks.length).toBe(timeline.length);
    timeline.forEach((entry, i) => {
      expect(marks[i].getAttribute("data-feature")).toBe(entry.feature_id);
      expect(Number(marks[i].getAttribute("cx"))).toBe(entry.start);
      expect(Number(marks[i].getAttribute("data-x"))).toBe(entry.start);
      if (entry.end !== null) {
        expect(Number(marks[i].getAttribute("data-end"))).toBe(entry.end);
      } else {
        expect(marks[i].hasAttribute("data-end")).toBe(false);
      }
    });
  });

  it("a point entry at 1.50 minutes lands at x=1.50 with no span", () => {
    const chart = renderTimelineScatter([
      { feature_id: "laughter", start: 1.5, end: null },
    ]);
    const mark = chart.querySelector("circle")!;
    expect(mark.getAttribute("cx")).toBe("1.5");
    expect(chart.querySelector("line")).toBeNull();
  });

  it("state entries draw a span from start to end", () => {
    const chart = renderTimelineScatter([
      { feature_id: "organization", start: 1.0, end: 2.0 },
    ]);
    const line = chart.querySelector("line")!;
    expect(Number(line.getAttribute("x1"))).toBe(1.0);
    expect(Number(line.getAttribute("x2"))).toBe(2.0);
  });

  it("empty timeline renders an explicit empty state", () => {
    const chart = renderTimelineScatter([]);
    expect(chart.querySelector(".empty-state")).not.toBeNull();
  });
});
