// End-to-end equivalence: the same interaction driven through the UI
// (typed `d`, typed `s`, clicked `ga`) must land the session in exactly
// the state a direct API run produces. Spawns the real service.

import { spawn, type ChildProcess } from "node:child_process";
import http from "node:http";
import { createServer } from "node:net";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { OutturnClient } from "../src/api.js";
import { DialogApp } from "../src/app.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const SITE_DOC = readFileSync(
  path.join(here, "..", "..", "tests", "fixtures", "mini_congress_extended.xml"),
  "utf-8",
);
const DC_DOC = readFileSync(
  path.join(here, "..", "..", "tests", "fixtures", "dc_directory.json"),
  "utf-8",
);
const PYTHON = process.env.OUTTURN_PYTHON ?? "python3";

let service: ChildProcess;
let baseUrl: string;
let client: OutturnClient;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function until<T>(probe: () => T | Promise<T>, ok: (value: T) => boolean,
                        what: string, timeoutMs = 20_000): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const value = await probe();
      if (ok(value)) return value;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 50));
  }
}

function healthStatus(url: string): Promise<number> {
  // plain node request: happy-dom's fetch logs refused connections
  return new Promise((resolve, reject) => {
    http.get(`${url}/health`, (res) => {
      res.resume();
      resolve(res.statusCode ?? 0);
    }).on("error", reject);
  });
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  service = spawn(PYTHON, ["-m", "outturn.cli", "serve", "--listen", `127.0.0.1:${port}`],
                  { stdio: "ignore" });
  await until(() => healthStatus(baseUrl), (status) => status === 200, "service health");
  client = new OutturnClient(baseUrl);
});

afterAll(() => {
  service?.kill();
});

async function directRun(siteId: string): Promise<Record<string, unknown>> {
  const created = await client.createSession(siteId);
  await client.submitInput(created.session, ["d"]);
  await client.submitInput(created.session, ["s"]);
  await client.submitInput(created.session, ["ga"]);
  const state = (await client.getState(created.session)) as unknown as Record<string, unknown>;
  delete state.session;
  return state;
}

function typeAndSay(root: HTMLElement, text: string): void {
  const box = root.querySelector("input[name=utterance]") as HTMLInputElement;
  box.value = text;
  const form = root.querySelector("form.out-of-turn") as HTMLFormElement;
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

describe("UI equivalence with a direct API run", () => {
  it("typed d, typed s, clicked ga reaches the identical session state", async () => {
    const siteId = await client.ingestSite(SITE_DOC);
    const reference = await directRun(siteId);

    document.body.innerHTML = '<div id="dialog"></div>';
    const root = document.getElementById("dialog") as HTMLElement;
    const app = new DialogApp(root, client);
    await app.start(siteId);
    expect(app.state.options.map((o) => o.label)).toEqual(["ga", "ak", "al", "mn"]);

    typeAndSay(root, "d");
    await until(() => app.state, (s) => s.inputSoFar.join(" ") === "d", "after d");
    expect(app.state.options.map((o) => o.label)).toEqual(["ga", "al", "mn"]);

    typeAndSay(root, "s");
    await until(() => app.state, (s) => s.inputSoFar.join(" ") === "d s", "after s");

    const gaLink = root.querySelector('a.option[data-label="ga"]') as HTMLAnchorElement;
    expect(gaLink).not.toBeNull();
    gaLink.click();
    await until(() => app.state, (s) => s.completed !== null, "completion");

    expect(app.state.completed).toBe("ga-senate-d.html");
    expect(root.querySelector("a.completed-page")?.getAttribute("href"))
      .toBe("ga-senate-d.html");

    const session = app.state.session as string;
    const uiState = (await client.getState(session)) as unknown as Record<string, unknown>;
    delete uiState.session;
    expect(uiState).toEqual(reference);
  });

  it("reloading the view from the service reproduces it (statelessness)", async () => {
    const siteId = await client.ingestSite(SITE_DOC);
    document.body.innerHTML = '<div id="dialog"></div>';
    const root = document.getElementById("dialog") as HTMLElement;
    const app = new DialogApp(root, client);
    await app.start(siteId);
    typeAndSay(root, "d s");
    await until(() => app.state, (s) => s.inputSoFar.length === 2, "after d s");
    const firstView = root.innerHTML;

    document.body.innerHTML = '<div id="dialog"></div>';
    const root2 = document.getElementById("dialog") as HTMLElement;
    const revived = new DialogApp(root2, client);
    await revived.resume(app.state.session as string);
    expect(root2.innerHTML).toBe(firstView);
    expect(revived.state).toEqual(app.state);
  });

  it("clicking a link and typing its label produce identical views", async () => {
    const siteId = await client.ingestSite(SITE_DOC);

    const runs: string[] = [];
    for (const mode of ["click", "type"] as const) {
      document.body.innerHTML = '<div id="dialog"></div>';
      const root = document.getElementById("dialog") as HTMLElement;
      const app = new DialogApp(root, client);
      await app.start(siteId);
      if (mode === "click") {
        (root.querySelector('a.option[data-label="al"]') as HTMLAnchorElement).click();
      } else {
        typeAndSay(root, "al");
      }
      await until(() => app.state, (s) => s.inputSoFar.length === 1, `after al (${mode})`);
      runs.push(root.innerHTML);
      expect(app.state.options.map((o) => o.label)).toEqual(["s", "h"]);
    }
    expect(runs[0]).toBe(runs[1]);
  });

  it("surfaces rejections without losing state", async () => {
    const siteId = await client.ingestSite(SITE_DOC);
    document.body.innerHTML = '<div id="dialog"></div>';
    const root = document.getElementById("dialog") as HTMLElement;
    const app = new DialogApp(root, client);
    await app.start(siteId);
    typeAndSay(root, "nonsense-token");
    await until(() => app.state, (s) => s.rejected, "rejection flag");
    expect(app.state.options.map((o) => o.label)).toEqual(["ga", "ak", "al", "mn"]);
    expect(root.querySelector(".banner.rejected")).not.toBeNull();
  });

  it("a quoted multi-word label expands and collapses in one turn", async () => {
    const siteId = await client.ingestSite(DC_DOC);
    document.body.innerHTML = '<div id="dialog"></div>';
    const root = document.getElementById("dialog") as HTMLElement;
    const app = new DialogApp(root, client);
    await app.start(siteId);
    typeAndSay(root, '"Washington D.C."');
    await until(() => app.state, (s) => s.completed !== null, "dc collapse");
    expect(app.state.completed).toBe("norton.html");
    expect(app.state.inputSoFar).toEqual(["washington d.c."]);
  });

  it("what-may-i-say reflects the remaining vocabulary", async () => {
    const siteId = await client.ingestSite(SITE_DOC);
    document.body.innerHTML = '<div id="dialog"></div>';
    const root = document.getElementById("dialog") as HTMLElement;
    const app = new DialogApp(root, client);
    await app.start(siteId);
    typeAndSay(root, "d s");
    await until(() => app.state, (s) => s.inputSoFar.length === 2, "after d s");
    (root.querySelector("button.what-may-i-say") as HTMLButtonElement).click();
    await until(() => app.state, (s) => s.reflection !== null, "reflection");
    expect(app.state.reflection).toEqual(["ga", "mn"]);
  });
});
