"""Stub test sandbox for evobench.

Runs a unit's tests in a forked child with line coverage over the unit's
source files and prints one JSON report:

    {"passed", "failed", "errored", "line_coverage_pct", "duration_ms",
     "tests": [{"name", "outcome", "message"}], "timeout"}

One-shot use:  harness.py <unit_dir> --timeout S [--deny-network]
Server use:    harness.py --serve   (one JSON request per stdin line:
               {"unit_dir", "timeout", "deny_network"}; one report per line)

Test discovery is built in: module-level `test*` functions and methods of
`Test*` classes in the manifest's test files. The manifest's test command
is not consulted.
"""

import json
import os
import select
import signal
import sys
import time
import traceback

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
os.environ.setdefault("PYTHONHASHSEED", "0")

PRELOAD = ["numpy", "scipy.stats", "sklearn.utils", "dateutil.relativedelta",
           "cryptography.fernet", "threading", "queue", "base64", "datetime",
           "http", "unittest"]


def preload():
    import importlib
    for name in PRELOAD:
        try:
            importlib.import_module(name)
        except Exception:  # noqa: BLE001 - optional dependency
            pass


def executable_lines(path):
    with open(path, encoding="utf-8") as fh:
        code = compile(fh.read(), path, "exec")
    lines = set()
    stack = [code]
    while stack:
        co = stack.pop()
        for _, _, line in co.co_lines():
            if line is not None and line > 0:
                lines.add(line)
        stack.extend(c for c in co.co_consts if hasattr(c, "co_lines"))
    return lines


def deny_network():
    import socket

    def refuse(*_args, **_kwargs):
        raise OSError("network access denied by sandbox")

    socket.socket.connect = refuse
    socket.socket.connect_ex = refuse
    socket.create_connection = refuse


def run_unit(unit_dir, deny_net):
    """Runs inside the forked child; returns the report dict."""
    import threading

    unit_dir = os.path.abspath(unit_dir)
    with open(os.path.join(unit_dir, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    os.chdir(unit_dir)
    sys.path.insert(0, unit_dir)
    if deny_net:
        deny_network()

    tracked = {}
    for rel in manifest["source_files"]:
        path = os.path.join(unit_dir, rel)
        tracked[path] = executable_lines(path)
    hits = {p: set() for p in tracked}

    def local_trace(frame, event, _arg):
        if event == "line":
            hits[frame.f_code.co_filename].add(frame.f_lineno)
        return local_trace

    def global_trace(frame, event, _arg):
        if frame.f_code.co_filename in hits:
            if event == "call":
                hits[frame.f_code.co_filename].add(frame.f_lineno)
            return local_trace
        return None

    tests = []
    started = time.perf_counter()
    sys.settrace(global_trace)
    threading.settrace(global_trace)
    try:
        for rel in manifest["test_files"]:
            run_test_file(os.path.join(unit_dir, rel), tests)
    finally:
        sys.settrace(None)
        threading.settrace(None)
    duration_ms = int((time.perf_counter() - started) * 1000)

    total = sum(len(v) for v in tracked.values())
    covered = sum(len(hits[p] & tracked[p]) for p in tracked)
    count = lambda o: sum(1 for t in tests if t["outcome"] == o)  # noqa: E731
    return {
        "passed": count("passed"),
        "failed": count("failed"),
        "errored": count("errored"),
        "line_coverage_pct": round(100.0 * covered / total, 3) if total and tests else 0.0,
        "duration_ms": duration_ms,
        "tests": tests,
        "timeout": False,
    }


def outcome_of(fn):
    try:
        fn()
        return "passed", ""
    except AssertionError as e:
        return "failed", ("AssertionError: " + str(e))[:300]
    except BaseException as e:  # noqa: BLE001 - subject code may raise anything
        if isinstance(e, KeyboardInterrupt):
            raise
        return "errored", "".join(traceback.format_exception_only(type(e), e)).strip()[:300]


def run_test_file(path, tests):
    import importlib.util
    import unittest

    stem = os.path.splitext(os.path.basename(path))[0]
    try:
        spec = importlib.util.spec_from_file_location(stem, path)
        module = importlib.util.module_from_spec(spec)
        sys.modules[stem] = module
        spec.loader.exec_module(module)
    except BaseException as e:  # noqa: BLE001
        tests.append({"name": stem, "outcome": "errored",
                      "message": "".join(traceback.format_exception_only(type(e), e)).strip()[:300]})
        return
    for name, obj in list(vars(module).items()):
        if getattr(obj, "__module__", None) != stem:
            continue
        if name.startswith("test") and callable(obj) and not isinstance(obj, type):
            outcome, message = outcome_of(obj)
            tests.append({"name": f"{stem}::{name}", "outcome": outcome, "message": message})
        elif name.startswith("Test") and isinstance(obj, type):
            for meth in sorted(m for m in vars(obj) if m.startswith("test")):
                def call(cls=obj, meth=meth):
                    if issubclass(cls, unittest.TestCase):
                        inst = cls(meth)
                        inst.setUp()
                        try:
                            getattr(inst, meth)()
                        finally:
                            inst.tearDown()
                    else:
                        inst = cls()
                        if hasattr(inst, "setup_method"):
                            inst.setup_method()
                        getattr(inst, meth)()
                outcome, message = outcome_of(call)
                tests.append({"name": f"{stem}::{name}::{meth}", "outcome": outcome, "message": message})


def timeout_report(timeout):
    return {"passed": 0, "failed": 0, "errored": 1, "line_coverage_pct": 0.0,
            "duration_ms": int(timeout * 1000),
            "tests": [{"name": "<timeout>", "outcome": "errored",
                       "message": f"exceeded {timeout}s"}],
            "timeout": True}


def execute(unit_dir, timeout, deny_net):
    """Forks a child for the run; kills its process group on timeout."""
    read_fd, write_fd = os.pipe()
    pid = os.fork()
    if pid == 0:
        os.close(read_fd)
        code = 0
        try:
            os.setpgid(0, 0)
            log = os.open(os.path.join(unit_dir, "harness.log"),
                          os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o644)
            os.dup2(log, 1)
            os.dup2(log, 2)
            devnull = os.open(os.devnull, os.O_RDONLY)
            os.dup2(devnull, 0)
            report = run_unit(unit_dir, deny_net)
            data = json.dumps(report).encode()
        except BaseException as e:  # noqa: BLE001
            data = json.dumps({"harness_error": repr(e)}).encode()
            code = 3
        view = memoryview(data)
        while view:
            n = os.write(write_fd, view)
            view = view[n:]
        os._exit(code)
    try:
        os.setpgid(pid, pid)
    except OSError:
        pass
    os.close(write_fd)
    deadline = time.monotonic() + timeout
    chunks = []
    timed_out = False
    while True:
        left = deadline - time.monotonic()
        if left <= 0:
            timed_out = True
            break
        ready, _, _ = select.select([read_fd], [], [], left)
        if not ready:
            continue
        chunk = os.read(read_fd, 1 << 16)
        if not chunk:
            break
        chunks.append(chunk)
    os.close(read_fd)
    if timed_out:
        for target in (lambda: os.killpg(pid, signal.SIGKILL), lambda: os.kill(pid, signal.SIGKILL)):
            try:
                target()
            except OSError:
                pass
        os.waitpid(pid, 0)
        return timeout_report(timeout)
    os.waitpid(pid, 0)
    result = json.loads(b"".join(chunks) or b"{}")
    if "harness_error" in result or "passed" not in result:
        raise RuntimeError(result.get("harness_error", "child produced no report"))
    return result


def serve():
    preload()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            report = execute(req["unit_dir"], float(req["timeout"]), bool(req.get("deny_network")))
        except Exception as e:  # noqa: BLE001
            report = {"harness_error": repr(e)}
        sys.stdout.write(json.dumps(report) + "\n")
        sys.stdout.flush()


def main(argv):
    if argv[:1] == ["--serve"]:
        serve()
        return 0
    import argparse
    parser = argparse.ArgumentParser(prog="runner")
    parser.add_argument("unit_dir")
    parser.add_argument("--timeout", type=float, default=60.0)
    parser.add_argument("--deny-network", action="store_true")
    args = parser.parse_args(argv)
    try:
        report = execute(args.unit_dir, args.timeout, args.deny_network)
    except Exception as e:  # noqa: BLE001
        print(f"runner malfunction: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(json.dumps(report) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
