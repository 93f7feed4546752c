// Free-text tokenization for the out-of-turn box. Must match the
// service's quoting rules exactly: whitespace separates tokens, double
// quotes group a multi-word label, backslash escapes `"` and `\`, and
// tokens are case-folded with internal whitespace collapsed.

export class TokenizeError extends Error {}

function normalize(raw: string): string {
  const token = raw.trim().replace(/\s+/g, " ").toLowerCase();
  if (!token) throw new TokenizeError("token text must be non-empty");
  return token;
}

export function tokenizeUtterance(text: string): string[] {
  const tokens: string[] = [];
  let i = 0;
  while (i < text.length) {
    const ch = text[i]!;
    if (/\s/.test(ch)) {
      i += 1;
      continue;
    }
    if (ch === "[" || ch === "]") {
      throw new TokenizeError("brackets are not valid in utterances");
    }
    if (ch === '"') {
      i += 1;
      let value = "";
      for (;;) {
        if (i >= text.length) throw new TokenizeError("unterminated quoted token");
        const c = text[i]!;
        if (c === '"') {
          i += 1;
          break;
        }
        if (c === "\\") {
          const next = text[i + 1];
          if (next !== '"' && next !== "\\") {
            throw new TokenizeError("bad escape in quoted token");
          }
          value += next;
          i += 2;
        } else {
          value += c;
          i += 1;
        }
      }
      tokens.push(normalize(value));
      continue;
    }
    let value = "";
    while (i < text.length && !/[\s[\]"\\]/.test(text[i]!)) {
      value += text[i];
      i += 1;
    }
    if (text[i] === "\\") throw new TokenizeError("stray backslash in utterance");
    tokens.push(normalize(value));
  }
  return tokens;
}
