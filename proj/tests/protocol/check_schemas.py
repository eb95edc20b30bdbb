#!/usr/bin/env python3
"""Runs the capgym CLI and validates everything it emits against schemas/."""

import argparse
import json
import os
import shutil
import socket
import subprocess
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(Path(schema_dir).glob("*.json")):
        doc = json.loads(path.read_text())
        if "$schema" in doc:
            resources.append((path.name, Resource.from_contents(doc)))
    return Registry().with_resources(resources)


class Checker:
    def __init__(self, schema_dir):
        self.registry = load_registry(schema_dir)
        self.validators = {}
        self.checked = 0
        self.failures = []

    def validate(self, name, doc, where):
        if name not in self.validators:
            schema = self.registry.contents(name + ".json")
            Draft202012Validator.check_schema(schema)
            self.validators[name] = Draft202012Validator(schema, registry=self.registry)
        self.checked += 1
        errors = sorted(self.validators[name].iter_errors(doc), key=lambda e: list(e.path))
        for e in errors[:3]:
            self.failures.append(f"{where}: {name}: {e.message} at {list(e.path)}")

    def expect(self, cond, message):
        if not cond:
            self.failures.append(message)


def run(cmd, **kw):
    res = subprocess.run(cmd, capture_output=True, text=True, **kw)
    if res.returncode != 0:
        raise SystemExit(f"command failed ({res.returncode}): {' '.join(cmd)}\n{res.stderr}")
    return res


def check_traces(cli, work, chk):
    out = work / "solution"
    run([cli, "gen-traces", "--kind", "solution", "--count", "15", "--seed-base", "100",
         "--expert", "mock", "--out", str(out), "--workers", "2"])
    lines = (out / "records.jsonl").read_text().splitlines()
    chk.expect(len(lines) == 105, f"solution dataset has {len(lines)} records, expected 105")
    for i, line in enumerate(lines):
        rec = json.loads(line)
        chk.validate("trace_record", rec, f"solution record {i}")
        for image in rec["images"]:
            chk.expect((out / image).is_file(), f"missing image {image}")
    manifest = json.loads((out / "manifest.json").read_text())
    chk.validate("dataset_manifest", manifest, "solution manifest")
    chk.expect(manifest["records"] == len(lines), "manifest record count")

    out = work / "correction"
    res = run([cli, "gen-traces", "--kind", "correction", "--types", "text,slider,image_grid", "--count", "4",
               "--seed-base", "300", "--expert", "mock", "--student", "random", "--out", str(out)])
    for i, line in enumerate((out / "records.jsonl").read_text().splitlines()):
        rec = json.loads(line)
        chk.validate("trace_record", rec, f"correction record {i}")
        chk.expect(rec["kind"] == "correction", "correction kind")
    chk.validate("dataset_manifest", json.loads((out / "manifest.json").read_text()), "correction manifest")

    bad = subprocess.run([cli, "gen-traces", "--count", "5", "--seed-base", "999999", "--out", str(work / "x")],
                         capture_output=True, text=True)
    chk.expect(bad.returncode == 2, f"seed range overlapping the test interval should exit 2, got {bad.returncode}")


def check_eval(cli, work, chk):
    report_path = work / "report.json"
    res = run([cli, "eval", "--agent", "oracle", "--per-type", "3", "--seed-base", "1000000000",
               "--out", str(report_path), "--format", "markdown"])
    report = json.loads(report_path.read_text())
    chk.validate("eval_report", report, "oracle report")
    chk.expect(report["overall"]["sr"] == 100.0, "oracle SR must be 100")
    chk.expect("| Overall |" in res.stdout, "markdown table on stdout")
    logs = (work / "report.logs.jsonl").read_text().splitlines()
    chk.expect(len(logs) == 21, f"{len(logs)} log lines, expected 21")
    for i, line in enumerate(logs):
        log = json.loads(line)
        chk.validate("instance_log", log, f"log {i}")
        for b in log["batches"]:
            chk.validate("action_batch", b["batch"], f"log {i} batch")

    script = work / "replay.json"
    script.write_text(json.dumps({"batches": [{"actions": [{"action": "left_click", "coordinate": [0, 0]}]}]}))
    run([cli, "eval", "--agent", f"replay:{script}", "--per-type", "2", "--out", str(work / "replay_report.json")])
    replay = json.loads((work / "replay_report.json").read_text())
    chk.validate("eval_report", replay, "replay report")
    chk.expect(replay["overall"]["solved"] == 0, "empty-click replay must not solve")


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def http(method, url, body=None, headers=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=data, method=method, headers=headers or {})
    if data is not None:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req, timeout=30) as r:
            return r.status, r.headers, r.read()
    except urllib.error.HTTPError as e:
        return e.code, e.headers, e.read()


def check_service(cli, schema_dir, chk):
    port = free_port()
    token = "protocol-test-token"
    env = dict(os.environ, CAPGYM_META_TOKEN=token)
    proc = subprocess.Popen([cli, "serve", "--addr", f"127.0.0.1:{port}", "--schema-dir", str(schema_dir)],
                            env=env, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE)
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if http("GET", base + "/api/health")[0] == 200:
                    break
            except OSError:
                pass
            time.sleep(0.1)
        else:
            raise SystemExit("service did not start")

        for t in ["text", "compact_text", "icon_match", "icon_selection", "paged", "slider", "image_grid"]:
            status, _, body = http("POST", base + "/api/challenge?inline=1", {"type": t, "seed": 7})
            created = json.loads(body)
            chk.expect(status == 200, f"create {t}: {status}")
            chk.validate("create_response", created, f"create {t}")
            cid = created["challenge_id"]
            path = f"{base}/api/challenge/{cid}"

            status, headers, png = http("GET", path + "/screenshot")
            chk.expect(status == 200 and png[:8] == b"\x89PNG\r\n\x1a\n", f"screenshot {t}")

            status, _, body = http("GET", path + "/meta")
            chk.expect(status == 403, f"meta without token {t}: {status}")
            chk.validate("error", json.loads(body), "meta 403")
            status, _, body = http("GET", path + "/meta", headers={"Authorization": f"Bearer {token}"})
            meta = json.loads(body)
            chk.validate("meta", meta, f"meta {t}")

            chk.validate("result", json.loads(http("GET", path + "/result")[2]), f"result {t}")
            for batch in meta["oracle_script"]:
                chk.validate("action_batch", batch, f"oracle batch {t}")
                status, _, body = http("POST", path + "/actions", batch)
                chk.validate("feedback", json.loads(body), f"feedback {t}")
            result = json.loads(http("GET", path + "/result")[2])
            chk.validate("result", result, f"final result {t}")
            chk.expect(result["solved"] is True, f"oracle over HTTP failed on {t}")
            status, _, body = http("POST", path + "/actions", meta["oracle_script"][0])
            chk.expect(status == 409, f"terminal session should answer 409, got {status}")
            chk.validate("error", json.loads(body), "409 body")

        for method, url, body, code in [
            ("POST", "/api/challenge", {"type": "riddle"}, 400),
            ("GET", "/api/challenge/none/result", None, 404),
            ("POST", "/api/challenge/none/actions", {"actions": [{"action": "terminate"}]}, 404),
        ]:
            status, _, raw = http(method, base + url, body)
            chk.expect(status == code, f"{method} {url}: {status}, expected {code}")
            chk.validate("error", json.loads(raw), f"{method} {url}")

        status, _, raw = http("GET", base + "/api/schema?name=openapi")
        chk.expect(status == 200 and json.loads(raw)["openapi"].startswith("3."), "openapi document served")
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True)
    ap.add_argument("--work", required=True)
    args = ap.parse_args()

    work = Path(args.work)
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    chk = Checker(args.schemas)
    check_traces(args.cli, work, chk)
    check_eval(args.cli, work, chk)
    check_service(args.cli, Path(args.schemas), chk)

    for f in chk.failures[:40]:
        print("FAIL", f)
    print(f"{chk.checked} documents validated, {len(chk.failures)} failures")
    return 1 if chk.failures else 0


if __name__ == "__main__":
    sys.exit(main())
