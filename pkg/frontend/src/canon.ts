// Canonical JSON rendering that byte-matches the service CLI's output
// (Python json.dumps with indent=2, sort_keys=True, ensure_ascii=True).
// Traces carry only strings, integers, booleans, nulls, arrays and objects;
// the formatter rejects NaN/Infinity and leaves float formatting to the
// common shortest-repr cases, which is all the API ever emits.

const SHORTHAND: Record<number, string> = {
  0x08: "\\b",
  0x09: "\\t",
  0x0a: "\\n",
  0x0c: "\\f",
  0x0d: "\\r",
};

function escapeString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const c = s.charCodeAt(i);
    if (c === 0x22) out += '\\"';
    else if (c === 0x5c) out += "\\\\";
    else if (SHORTHAND[c]) out += SHORTHAND[c];
    else if (c < 0x20 || c > 0x7e) out += "\\u" + c.toString(16).padStart(4, "0");
    else out += s[i];
  }
  return out + '"';
}

// Python sorts keys by code point, not UTF-16 code unit.
function compareKeys(a: string, b: string): number {
  const ai = [...a], bi = [...b];
  const n = Math.min(ai.length, bi.length);
  for (let i = 0; i < n; i++) {
    const d = (ai[i] as string).codePointAt(0)! - (bi[i] as string).codePointAt(0)!;
    if (d !== 0) return d;
  }
  return ai.length - bi.length;
}

function formatNumber(n: number): string {
  if (!Number.isFinite(n)) throw new Error("non-finite number in trace");
  return String(n);
}

function render(value: unknown, depth: number): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") return formatNumber(value);
  if (typeof value === "string") return escapeString(value);
  const pad = "  ".repeat(depth + 1);
  const close = "  ".repeat(depth);
  if (Array.isArray(value)) {
    if (value.length === 0) return "[]";
    const items = value.map((v) => pad + render(v, depth + 1));
    return "[\n" + items.join(",\n") + "\n" + close + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value as object).sort(compareKeys);
    if (keys.length === 0) return "{}";
    const items = keys.map(
      (k) =>
        pad + escapeString(k) + ": " + render((value as Record<string, unknown>)[k], depth + 1),
    );
    return "{\n" + items.join(",\n") + "\n" + close + "}";
  }
  throw new Error(`cannot serialize ${typeof value}`);
}

export function canonicalJson(value: unknown): string {
  return render(value, 0);
}
