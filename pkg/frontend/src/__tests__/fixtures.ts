import type { FormInfo, GenerateResponse, ValidationReport } from "../api";

const FORM_LINES: Record<string, number[]> = {
  Wuyanjueju: [5, 5, 5, 5],
  Wuyanlvshi: [5, 5, 5, 5, 5, 5, 5, 5],
  Qiyanjueju: [7, 7, 7, 7],
  Qiyanlvshi: [7, 7, 7, 7, 7, 7, 7, 7],
  Rumengling: [6, 6, 5, 6, 2, 2, 6],
  Jianzimulanhua: [4, 7, 4, 7, 4, 7, 4, 7],
  Qingpingyue: [4, 5, 7, 6, 6, 6, 6, 6],
  Dielianhua: [7, 4, 5, 7, 7, 7, 4, 5, 7, 7],
  Manjianghong: [4, 3, 4, 7, 7, 3, 5, 4, 3, 3, 3, 5, 4, 7, 7, 3, 5, 4, 3, 3],
  Qinyuanchun: [4, 4, 4, 5, 4, 4, 4, 5, 4, 3, 5, 4, 4, 2, 3, 4, 5, 4, 4, 4, 5, 4, 3, 5, 4, 4],
};

function template(lines: number[]): string {
  return lines
    .map((n, i) => "[M]".repeat(n) + (i % 2 === 0 && i < lines.length - 1 ? "，" : "。"))
    .join("\n");
}

export const TEN_FORMS: FormInfo[] = Object.entries(FORM_LINES).map(([name, lines]) => ({
  name,
  display_name: name,
  category: lines.every((n) => n === lines[0]) ? "SHI" : "CI",
  total_chars: lines.reduce((a, b) => a + b, 0),
  masked_template: template(lines),
}));

export const PASSING_REPORT: ValidationReport = {
  passes: true,
  line_count_match: true,
  per_line: [6, 6, 5, 6, 2, 2, 6].map((n) => ({ expected: n, actual: n, match: true })),
  excess_positions: [],
};

export const PASSING_RESPONSE: GenerateResponse = {
  poem: "笑口频开深院，更说秋风天气。心事向人知，却好兴高采烈。休觅，休觅，酒到不知醒地。",
  report: PASSING_REPORT,
  masked_template: template(FORM_LINES.Rumengling),
  stop_reason: "eop",
  timing_ms: 42,
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
