"""Subprocess backend: handshake, invoke protocol, stateful lifecycle, glue adapters."""

import sys
import textwrap

import pytest

from comodi.builtins import make_elementary
from comodi.engine import (
    ComponentError,
    EngineError,
    ProtocolError,
    close_instance,
    instantiate,
    invoke,
    make_value,
)
from comodi.gluegen import emit_glue, parse_signature
from comodi.model import GlobalName, INTEGER64, REAL64, Version

PY = sys.executable


def child_descriptor(name, path, *, uses=(), provides=(), stateful=False, version="1.0.0"):
    d = make_elementary(name, uses=uses, provides=provides, version=version,
                        backend="subprocess", artifact=str(path),
                        entry=f"{PY} {{ARTIFACT}}")
    if stateful:
        import dataclasses
        from comodi.model import Behavior
        d = dataclasses.replace(d, behavior=Behavior(deterministic=True, stateful=True))
    return d


def write_child(tmp_path, body: str, filename="child.py"):
    path = tmp_path / filename
    path.write_text(textwrap.dedent(body))
    return path


def path_resolver(descriptor):
    return descriptor.implementation.artifact


class TestHandshake:
    def test_matching_hello_accepted(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 1,
                              "component": "org.test.echo", "version": "1.0.0"}))
            sys.stdout.flush()
            sys.stdin.readline()
        """)
        d = child_descriptor("org.test.echo", path, provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        assert instance.state == "live"
        close_instance(instance)

    def test_version_mismatch_rejected(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 1,
                              "component": "org.test.echo", "version": "2.0.0"}))
            sys.stdout.flush()
        """)
        d = child_descriptor("org.test.echo", path, provides=[("y", REAL64)])
        with pytest.raises(EngineError) as err:
            instantiate(d, path_resolver)
        assert err.value.code == "HANDSHAKE"
        assert "2.0.0" in str(err.value)

    def test_protocol_mismatch_rejected(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 99,
                              "component": "org.test.echo", "version": "1.0.0"}))
            sys.stdout.flush()
        """)
        d = child_descriptor("org.test.echo", path, provides=[("y", REAL64)])
        with pytest.raises(EngineError) as err:
            instantiate(d, path_resolver)
        assert err.value.code == "HANDSHAKE"

    def test_silent_child_rejected(self, tmp_path):
        path = write_child(tmp_path, "pass\n")
        d = child_descriptor("org.test.mute", path, provides=[("y", REAL64)])
        with pytest.raises(ProtocolError):
            instantiate(d, path_resolver)

    def test_artifact_missing(self, tmp_path):
        d = child_descriptor("org.test.ghost", tmp_path / "nope.py",
                             provides=[("y", REAL64)])
        with pytest.raises(EngineError) as err:
            instantiate(d, path_resolver)
        assert err.value.code == "ARTIFACT_MISSING"


ECHO_CHILD = """
    import json, sys
    print(json.dumps({"msg": "hello", "protocol": 1,
                      "component": "org.test.doubler", "version": "1.0.0"}))
    sys.stdout.flush()
    for line in sys.stdin:
        msg = json.loads(line)
        if msg.get("msg") == "close":
            break
        if msg.get("msg") != "invoke":
            print(json.dumps({"msg": "error", "code": "PROTOCOL", "detail": "?"}))
            sys.stdout.flush()
            continue
        x = msg["inputs"]["x"]
        print(json.dumps({"msg": "result", "outputs": {"y": 2 * x}}))
        sys.stdout.flush()
"""


class TestInvoke:
    def test_roundtrip(self, tmp_path):
        path = write_child(tmp_path, ECHO_CHILD)
        d = child_descriptor("org.test.doubler", path,
                             uses=[("x", REAL64)], provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        out = invoke(instance, {"x": make_value(REAL64, 2.5)})
        assert out["y"].payload == 5.0
        assert instance.state == "closed"  # one invoke per non-stateful process

    def test_second_invoke_on_closed_refused(self, tmp_path):
        path = write_child(tmp_path, ECHO_CHILD)
        d = child_descriptor("org.test.doubler", path,
                             uses=[("x", REAL64)], provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        invoke(instance, {"x": make_value(REAL64, 1.0)})
        with pytest.raises(EngineError, match="closed"):
            invoke(instance, {"x": make_value(REAL64, 1.0)})

    def test_component_error_surfaced(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 1,
                              "component": "org.test.sad", "version": "1.0.0"}))
            sys.stdout.flush()
            sys.stdin.readline()
            print(json.dumps({"msg": "error", "code": "NUMERIC", "detail": "diverged"}))
            sys.stdout.flush()
        """)
        d = child_descriptor("org.test.sad", path, provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        with pytest.raises(ComponentError) as err:
            invoke(instance, {})
        assert err.value.code == "NUMERIC"
        assert err.value.detail == "diverged"

    def test_key_permutation_decodes_identically(self, tmp_path):
        # same messages, scrambled key order, hand-built JSON text
        path = write_child(tmp_path, """
            import sys
            sys.stdout.write('{"version": "1.0.0", "component": "org.test.perm", '
                             '"protocol": 1, "msg": "hello"}\\n')
            sys.stdout.flush()
            sys.stdin.readline()
            sys.stdout.write('{"outputs": {"y": 3.0}, "msg": "result"}\\n')
            sys.stdout.flush()
        """)
        d = child_descriptor("org.test.perm", path, provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        out = invoke(instance, {})
        assert out["y"].payload == 3.0

    def test_unknown_message_kind_rejected(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 1,
                              "component": "org.test.odd", "version": "1.0.0"}))
            sys.stdout.flush()
            sys.stdin.readline()
            print(json.dumps({"msg": "progress", "pct": 50}))
            sys.stdout.flush()
        """)
        d = child_descriptor("org.test.odd", path, provides=[("y", REAL64)])
        instance = instantiate(d, path_resolver)
        with pytest.raises(ProtocolError, match="unknown message kind"):
            invoke(instance, {})

    def test_stateful_keeps_process(self, tmp_path):
        path = write_child(tmp_path, """
            import json, sys
            print(json.dumps({"msg": "hello", "protocol": 1,
                              "component": "org.test.counter", "version": "1.0.0"}))
            sys.stdout.flush()
            count = 0
            for line in sys.stdin:
                msg = json.loads(line)
                if msg.get("msg") == "close":
                    break
                count += 1
                print(json.dumps({"msg": "result", "outputs": {"n": count}}))
                sys.stdout.flush()
        """)
        d = child_descriptor("org.test.counter", path, provides=[("n", INTEGER64)],
                             stateful=True)
        instance = instantiate(d, path_resolver)
        assert invoke(instance, {})["n"].payload == 1
        assert invoke(instance, {})["n"].payload == 2
        close_instance(instance)
        assert instance.handle.proc.wait(timeout=5) == 0


class TestGlueAdapter:
    def make_wrapped_add(self, tmp_path):
        sig = parse_signature("routine add(a: real64 in, b: real64 in) -> real64")
        bundle = emit_glue(sig, name=GlobalName.parse("org.comodi.examples.add_sub"),
                           version=Version(1, 0, 0))
        glue = tmp_path / "add_glue.py"
        glue.write_text(bundle.glue_source)
        (tmp_path / "add.py").write_text("def add(a, b):\n    return a + b\n")
        import dataclasses
        d = dataclasses.replace(
            bundle.descriptor_skeleton,
            implementation=dataclasses.replace(
                bundle.descriptor_skeleton.implementation,
                artifact=str(glue), entry=f"{PY} {{ARTIFACT}}"))
        return d

    def test_wrapped_add_equals_direct_call(self, tmp_path):
        d = self.make_wrapped_add(tmp_path)
        instance = instantiate(d, path_resolver)
        out = invoke(instance, {"a": make_value(REAL64, 2.0),
                                "b": make_value(REAL64, 3.0)})
        assert out["result"].payload == 5.0  # == add(2.0, 3.0)

    def test_glue_reports_routine_exception(self, tmp_path):
        d = self.make_wrapped_add(tmp_path)
        glue = tmp_path / "add.py"
        glue.write_text("def add(a, b):\n    raise RuntimeError('numerical storm')\n")
        instance = instantiate(d, path_resolver)
        with pytest.raises(ComponentError) as err:
            invoke(instance, {"a": make_value(REAL64, 1.0),
                              "b": make_value(REAL64, 2.0)})
        assert err.value.code == "EXCEPTION"
        assert "numerical storm" in err.value.detail
