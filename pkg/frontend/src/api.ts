import { z } from "zod";

export const FormInfo = z.object({
  name: z.string(),
  display_name: z.string(),
  category: z.string(),
  total_chars: z.number().int().positive(),
  masked_template: z.string(),
});
export type FormInfo = z.infer<typeof FormInfo>;

export const LineResult = z.object({
  expected: z.number().int(),
  actual: z.number().int(),
  match: z.boolean(),
});
export type LineResult = z.infer<typeof LineResult>;

export const ValidationReport = z.object({
  passes: z.boolean(),
  line_count_match: z.boolean(),
  per_line: z.array(LineResult),
  excess_positions: z.array(z.number().int()),
});
export type ValidationReport = z.infer<typeof ValidationReport>;

export const GenerateResponse = z.object({
  poem: z.string(),
  report: ValidationReport,
  masked_template: z.string(),
  stop_reason: z.string(),
  timing_ms: z.number(),
});
export type GenerateResponse = z.infer<typeof GenerateResponse>;

export type GenerateRequest = {
  prompt: string;
  form: string;
  strict: boolean;
  seed?: number;
  temperature?: number;
};

async function parseOrThrow(res: Response): Promise<unknown> {
  if (!res.ok) {
    let detail = `${res.status}`;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new Error(detail);
  }
  return res.json();
}

export async function fetchForms(): Promise<FormInfo[]> {
  const res = await fetch("/api/forms");
  return z.array(FormInfo).parse(await parseOrThrow(res));
}

export async function generatePoem(req: GenerateRequest): Promise<GenerateResponse> {
  const res = await fetch("/api/generate", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(req),
  });
  return GenerateResponse.parse(await parseOrThrow(res));
}

export async function validatePoem(poem: string, form: string): Promise<ValidationReport> {
  const res = await fetch("/api/validate", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ poem, form }),
  });
  return ValidationReport.parse(await parseOrThrow(res));
}
