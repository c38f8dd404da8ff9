/**
 * Interactive operator console.
 *
 *   node dist/app.js --host 127.0.0.1 --port 8765 [--glove-version V2]
 *
 * Keys: s start, p pause/resume, a abort, q quit.
 */

import * as process from "node:process";

import { connect } from "./client.js";
import { renderFrame } from "./render.js";

interface Args {
  host: string;
  port: number;
  gloveVersion: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { host: "127.0.0.1", port: 0, gloveVersion: "V2" };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--host") args.host = argv[++i] ?? args.host;
    else if (a === "--port") args.port = Number(argv[++i]);
    else if (a === "--glove-version") args.gloveVersion = argv[++i] ?? args.gloveVersion;
    else {
      console.error(`unknown argument ${a}`);
      process.exit(2);
    }
  }
  if (!Number.isInteger(args.port) || args.port <= 0 || args.port > 65535) {
    console.error("usage: app --host HOST --port PORT [--glove-version V1|V2]");
    process.exit(2);
  }
  return args;
}

export function main(argv: string[]): void {
  const args = parseArgs(argv);
  let dirty = true;
  const client = connect({
    host: args.host,
    port: args.port,
    onChange: () => {
      dirty = true;
    },
  });

  // Redraw at most 10 times a second regardless of message rate.
  const timer = setInterval(() => {
    if (!dirty) return;
    dirty = false;
    const frame = renderFrame(client.getState(), args.gloveVersion);
    process.stdout.write("[2J[H" + frame + "\n\n[s]tart [p]ause [a]bort [q]uit\n");
  }, 100);

  const quit = () => {
    clearInterval(timer);
    client.close();
    if (process.stdin.isTTY) process.stdin.setRawMode(false);
    process.exit(0);
  };

  if (process.stdin.isTTY) process.stdin.setRawMode(true);
  process.stdin.resume();
  process.stdin.setEncoding("utf-8");
  process.stdin.on("data", (key: string) => {
    if (key === "s") client.send("start");
    else if (key === "p") client.send("pause");
    else if (key === "a") client.send("abort");
    else if (key === "q" || key === "") quit();
  });
  process.on("SIGINT", quit);
}

main(process.argv.slice(2));
