import { describe, expect, it } from "vitest";
import { displayLines } from "../lines";

describe("displayLines", () => {
  it("splits on Chinese punctuation keeping it attached", () => {
    const lines = displayLines("休觅，休觅，酒到不知醒地。");
    expect(lines.map((l) => l.text)).toEqual(["休觅", "休觅", "酒到不知醒地"]);
    expect(lines.map((l) => l.punct)).toEqual(["，", "，", "。"]);
  });

  it("treats newlines as separators without rendering them", () => {
    const lines = displayLines("白日依山尽，\n黄河入海流。");
    expect(lines).toHaveLength(2);
    expect(lines[1].text).toBe("黄河入海流");
  });

  it("returns nothing for an empty poem", () => {
    expect(displayLines("")).toEqual([]);
  });
});
