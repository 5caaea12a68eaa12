/**
 * Open-loop control demo: stands in for the agent side of the coupling.
 *
 * Drives running solver workers entirely over TCP with a sinusoidal jet law
 * Q(t) = amplitude * sin(2 pi st * t), reading their witness states and
 * logging the returned force coefficients to a cl_cd.csv-compatible file.
 * This is the classical fixed-frequency actuation that a learnt policy is
 * compared against.
 *
 *   node dist/demo.js --addr HOST:PORT [--amplitude 0.01] [--st 0.161]
 *        [--steps 120] [--envs 2] [--pes 2] [--t-action 0.3]
 *        [--episode 0] [--timeout-ms 120000] [--out cl_cd_demo.csv]
 */

import * as fs from "node:fs";

import { BrokerClient } from "./client.js";
import { Tensor } from "./wire.js";

interface Args {
  addr: string;
  amplitude: number;
  st: number;
  steps: number;
  envs: number;
  pes: number;
  tAction: number;
  episode: number;
  timeoutMs: number;
  out: string;
}

function parseArgs(argv: string[]): Args {
  const defaults: Args = {
    addr: "",
    amplitude: 0.01,
    st: 0.161,
    steps: 120,
    envs: 2,
    pes: 2,
    tAction: 0.3,
    episode: 0,
    timeoutMs: 120_000,
    out: "cl_cd_demo.csv",
  };
  for (let i = 2; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (val === undefined) throw new Error(`missing value for ${key}`);
    switch (key) {
      case "--addr": defaults.addr = val; break;
      case "--amplitude": defaults.amplitude = Number(val); break;
      case "--st": defaults.st = Number(val); break;
      case "--steps": defaults.steps = Number(val); break;
      case "--envs": defaults.envs = Number(val); break;
      case "--pes": defaults.pes = Number(val); break;
      case "--t-action": defaults.tAction = Number(val); break;
      case "--episode": defaults.episode = Number(val); break;
      case "--timeout-ms": defaults.timeoutMs = Number(val); break;
      case "--out": defaults.out = val; break;
      default: throw new Error(`unknown flag ${key}`);
    }
  }
  if (!defaults.addr) throw new Error("--addr HOST:PORT is required");
  return defaults;
}

function fmt(x: number): string {
  return Number(x.toPrecision(9)).toString();
}

export async function openLoopDemo(args: Args): Promise<void> {
  const client = await BrokerClient.connectAddress(args.addr);
  try {
    await client.ping();
    const rows: string[] = [];
    const header = ["t"];
    for (let j = 0; j < args.pes; j++) header.push(`cd_pe${j}`, `cl_pe${j}`);
    rows.push(header.join(","));

    for (let n = 0; n < args.steps; n++) {
      for (let w = 0; w < args.envs; w++) {
        for (let j = 0; j < args.pes; j++) {
          const state = await client.getTensor(
            `ep${args.episode}.env${w}.pe${j}.state.${n}`, args.timeoutMs);
          if (state === null) throw new Error(`state timeout at step ${n}`);
        }
      }
      // command the rate the ramp should reach by the end of the interval
      const tCmd = (n + 1) * args.tAction;
      const q = args.amplitude * Math.sin(2 * Math.PI * args.st * tCmd);
      const action: Tensor = { dtype: "f64", dims: [1], data: Float64Array.from([q]) };
      for (let w = 0; w < args.envs; w++) {
        for (let j = 0; j < args.pes; j++) {
          await client.putTensor(`ep${args.episode}.env${w}.pe${j}.action.${n}`, action);
        }
      }
      for (let w = 0; w < args.envs; w++) {
        const cols: number[] = [];
        let tEnd = 0;
        for (let j = 0; j < args.pes; j++) {
          const reward = await client.getTensor(
            `ep${args.episode}.env${w}.pe${j}.reward.${n}`, args.timeoutMs);
          if (reward === null) throw new Error(`reward timeout at step ${n}`);
          const [cd, cl, t] = reward.data as Float64Array;
          cols.push(cd, cl);
          tEnd = t;
        }
        if (w === 0) rows.push([tEnd, ...cols].map(fmt).join(","));
      }
    }
    fs.writeFileSync(args.out, rows.join("\n") + "\n");
    console.log(`open-loop demo done: ${args.steps} steps -> ${args.out}`);
  } finally {
    client.close();
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("demo.js") || entry.endsWith("demo.ts")) {
  openLoopDemo(parseArgs(process.argv)).catch((err) => {
    console.error(String(err));
    process.exit(1);
  });
}
