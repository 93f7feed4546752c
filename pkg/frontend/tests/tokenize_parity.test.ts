// Differential check against the service's tokenizer: both sides must
// agree on token boundaries and on what is rejected, over a shared
// pseudo-random corpus. (Final normalization happens server-side again,
// so only boundary behavior needs to be identical.)

import { spawnSync } from "node:child_process";

import { describe, expect, it } from "vitest";

import { tokenizeUtterance } from "../src/tokenize.js";

const PYTHON = process.env.OUTTURN_PYTHON ?? "python3";

// xorshift so the corpus is identical on every run
function* rng(seed: number): Generator<number> {
  let x = seed || 1;
  for (;;) {
    x ^= x << 13;
    x ^= x >>> 17;
    x ^= x << 5;
    x >>>= 0;
    yield x;
  }
}

function buildCorpus(count: number): string[] {
  const glyphs = ['a', 'b', 'ga', 'D.C.', ' ', '  ', '"', '\\', '[', ']', '\t', 'X'];
  const out: string[] = [];
  const random = rng(20240817);
  for (let i = 0; i < count; i += 1) {
    const length = Number(random.next().value) % 9;
    let text = "";
    for (let j = 0; j < length; j += 1) {
      text += glyphs[Number(random.next().value) % glyphs.length];
    }
    out.push(text);
  }
  return out;
}

function pythonTokenize(corpus: string[]): Array<string[] | null> {
  const program = [
    "import json, sys",
    "from outturn.dialog import ScriptError, tokenize_utterance",
    "out = []",
    "for text in json.load(sys.stdin):",
    "    try:",
    "        out.append(list(tokenize_utterance(text)))",
    "    except (ScriptError, ValueError):",
    "        out.append(None)",
    "print(json.dumps(out))",
  ].join("\n");
  const result = spawnSync(PYTHON, ["-c", program], {
    input: JSON.stringify(corpus),
    encoding: "utf-8",
  });
  expect(result.status).toBe(0);
  return JSON.parse(result.stdout) as Array<string[] | null>;
}

describe("tokenizer parity with the service", () => {
  it("agrees on 400 corpus strings", () => {
    const corpus = buildCorpus(400);
    const expected = pythonTokenize(corpus);
    corpus.forEach((text, i) => {
      let mine: string[] | null;
      try {
        mine = tokenizeUtterance(text);
      } catch {
        mine = null;
      }
      expect(mine, JSON.stringify(text)).toEqual(expected[i]);
    });
  });
});
