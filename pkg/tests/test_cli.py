"""CLI contract: subcommands, the exit-code table, --json discipline, e2e flows."""

import json
from pathlib import Path

import pytest

from comodi.cli import main

from conftest import EX

ADD_SIG = "routine add(a: real64 in, b: real64 in) -> real64\n"


@pytest.fixture(autouse=True)
def isolate_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("COMODI_REGISTRY", raising=False)
    monkeypatch.delenv("COMODI_COMPILE_SERVER", raising=False)
    return tmp_path


def write_demo_project(tmp_path) -> Path:
    path = tmp_path / "demo.project.json"
    assert main(["project", "new", str(path), "--title", "demo"]) == 0
    assert main(["project", "add", str(path), "c", f"{EX}.const", "1.0.0",
                 "--param", "value=2.0"]) == 0
    assert main(["project", "add", str(path), "sq", f"{EX}.square", "1.0.0"]) == 0
    assert main(["project", "add", str(path), "cap", f"{EX}.capture", "1.0.0"]) == 0
    assert main(["project", "connect", str(path), "c.x", "sq.x"]) == 0
    assert main(["project", "connect", str(path), "sq.y", "cap.x"]) == 0
    return path


class TestExitCodes:
    def test_unknown_subcommand_is_user_error(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_no_subcommand_is_user_error(self):
        assert main([]) == 1

    def test_unknown_flag_is_user_error(self, tmp_path):
        (tmp_path / "a.sig").write_text(ADD_SIG)
        assert main(["wrap", str(tmp_path / "a.sig"), "--sideways"]) == 1

    def test_missing_input_file_is_user_error(self, tmp_path):
        assert main(["wrap", str(tmp_path / "nope.sig")]) == 1

    def test_bad_signature_is_validation_error(self, tmp_path):
        (tmp_path / "bad.sig").write_text("routine f(a real64)")
        assert main(["wrap", str(tmp_path / "bad.sig")]) == 2

    def test_project_validation_failure_is_2(self, tmp_path, capsys):
        path = tmp_path / "p.project.json"
        assert main(["project", "new", str(path)]) == 0
        assert main(["project", "add", str(path), "sq", f"{EX}.square", "1.0.0"]) == 0
        assert main(["project", "validate", str(path)]) == 2
        assert "UNBOUND_REQUIRED_USES" in capsys.readouterr().err

    def test_type_mismatch_connect_is_2(self, tmp_path, capsys):
        path = tmp_path / "p.project.json"
        main(["project", "new", str(path)])
        main(["project", "add", str(path), "t", f"{EX}.text_const", "1.0.0"])
        main(["project", "add", str(path), "sq", f"{EX}.square", "1.0.0"])
        assert main(["project", "connect", str(path), "t.x", "sq.x"]) == 2
        assert "TYPE_MISMATCH" in capsys.readouterr().err

    def test_unreachable_registry_is_3(self, tmp_path):
        assert main(["search", "--text", "x",
                     "--registry", "http://127.0.0.1:1"]) == 3

    def test_search_without_criteria_is_1(self, registry_server):
        url, _ = registry_server
        assert main(["search", "--registry", url]) == 1

    def test_no_registry_configured_is_1(self):
        assert main(["search", "--text", "x"]) == 1

    def test_malformed_project_file_is_2(self, tmp_path):
        path = tmp_path / "broken.project.json"
        path.write_text("{not json")
        assert main(["project", "validate", str(path)]) == 2


class TestJsonDiscipline:
    def cases(self, tmp_path, registry_url):
        sig = tmp_path / "add.sig"
        sig.write_text(ADD_SIG)
        demo = write_demo_project(tmp_path)
        return [
            (["wrap", str(sig)], 0),
            (["wrap", str(tmp_path / "missing.sig")], 1),
            (["project", "validate", str(demo)], 0),
            (["run", str(demo)], 0),
            (["search", "--text", "x", "--registry", registry_url], 0),
            (["search", "--text", "x", "--registry", "http://127.0.0.1:1"], 3),
            (["fetch", "org.no.pe", "--registry", registry_url], 3),
        ]

    def test_every_path_emits_single_json_document(self, tmp_path, registry_server,
                                                   capsys):
        url, _ = registry_server
        for argv, want_code in self.cases(tmp_path, url):
            capsys.readouterr()
            assert main(argv + ["--json"]) == want_code, argv
            out = capsys.readouterr().out
            document = json.loads(out)  # exactly one parseable document
            assert isinstance(document, dict)
            assert document["ok"] == (want_code == 0)


class TestWrap:
    def test_writes_descriptor_and_glue(self, tmp_path, capsys):
        sig = tmp_path / "add.sig"
        sig.write_text(ADD_SIG)
        assert main(["wrap", str(sig), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert Path(payload["descriptor"]).name == "add.comodi.json"
        assert Path(payload["glue"]).name == "add_glue.py"
        assert Path(payload["descriptor"]).exists()
        assert Path(payload["glue"]).exists()
        from comodi.model import parse_descriptor
        descriptor = parse_descriptor(Path(payload["descriptor"]).read_text())
        assert [p.name for p in descriptor.ports] == ["a", "b", "result"]


class TestProjectAndRun:
    def test_run_writes_report_with_value(self, tmp_path, capsys):
        demo = write_demo_project(tmp_path)
        report_path = tmp_path / "out.json"
        assert main(["run", str(demo), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        by_id = {n["id"]: n for n in report["nodes"]}
        assert by_id["cap"]["outputs"]["captured"] == 4.0
        assert report["totals"]["nodes"] == 3

    def test_report_file_equals_json_stdout_report(self, tmp_path, capsys):
        demo = write_demo_project(tmp_path)
        report_path = tmp_path / "out.json"
        capsys.readouterr()
        assert main(["run", str(demo), "--report", str(report_path), "--json"]) == 0
        stdout_doc = json.loads(capsys.readouterr().out)
        assert stdout_doc["report"] == json.loads(report_path.read_text())

    def test_run_with_failing_node_is_2(self, tmp_path):
        path = tmp_path / "p.project.json"
        main(["project", "new", str(path)])
        main(["project", "add", str(path), "bad", f"{EX}.fail", "1.0.0"])
        assert main(["run", str(path)]) == 2

    def test_replace_square_with_cube(self, tmp_path):
        demo = write_demo_project(tmp_path)
        assert main(["project", "replace", str(demo), "sq",
                     f"{EX}.cube", "1.0.0"]) == 0
        report_path = tmp_path / "r.json"
        assert main(["run", str(demo), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        by_id = {n["id"]: n for n in report["nodes"]}
        assert by_id["cap"]["outputs"]["captured"] == 8.0

    def test_replace_incompatible_is_2(self, tmp_path):
        demo = write_demo_project(tmp_path)
        assert main(["project", "replace", str(demo), "sq",
                     f"{EX}.const", "1.0.0"]) == 2
        # file unchanged on failure
        assert f"{EX}.square" in (tmp_path / "demo.project.json").read_text()


class TestRegistryFlows:
    def test_publish_search_fetch_counts(self, tmp_path, registry_server, capsys):
        url, _ = registry_server
        sq = tmp_path / "square.comodi.json"
        from comodi.builtins import standard_catalog
        from comodi.model import GlobalName, Version, serialize_descriptor
        catalog = standard_catalog()
        sq.write_text(serialize_descriptor(
            catalog.resolve(GlobalName.parse(f"{EX}.square"), Version(1, 0, 0))))
        assert main(["publish", str(sq), "--artifact", "file:///tmp/sq.bin",
                     "--registry", url]) == 0
        # duplicate publish is a remote failure
        assert main(["publish", str(sq), "--artifact", "file:///tmp/sq.bin",
                     "--registry", url]) == 3

        capsys.readouterr()
        assert main(["fetch", f"{EX}.square", "--latest", "--registry", url,
                     "--json"]) == 0
        first = json.loads(capsys.readouterr().out)
        assert main(["fetch", f"{EX}.square", "--latest", "--registry", url,
                     "--json"]) == 0
        second = json.loads(capsys.readouterr().out)
        assert first["download_count"] == 1
        assert second["download_count"] == 2

        assert main(["search", "--provides-type", "real64", "--registry", url,
                     "--json"]) == 0
        hits = json.loads(capsys.readouterr().out)["records"]
        assert [r["descriptor"]["name"] for r in hits] == [f"{EX}.square"]

    def test_registry_from_environment(self, tmp_path, registry_server, monkeypatch,
                                       capsys):
        url, _ = registry_server
        monkeypatch.setenv("COMODI_REGISTRY", url)
        assert main(["search", "--text", "anything", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["records"] == []

    def test_registry_from_config_file(self, tmp_path, registry_server, capsys):
        url, _ = registry_server
        (tmp_path / "comodi.config.json").write_text(json.dumps({"registry": url}))
        assert main(["search", "--text", "anything", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["records"] == []


class TestCompileFlow:
    def test_compile_via_loopback(self, tmp_path, build_server, capsys):
        src = tmp_path / "main.c"
        src.write_bytes(b"int main;")
        out = tmp_path / "art.bin"
        assert main(["compile", str(src), "--language", "stub",
                     "--server", build_server, "-o", str(out)]) == 0
        assert out.read_bytes() == b"int main;"

    def test_failed_compile_is_2_with_diagnostics(self, tmp_path, build_server, capsys):
        src = tmp_path / "main.c"
        src.write_bytes(b"x")
        assert main(["compile", str(src), "--language", "stub-fail",
                     "--server", build_server]) == 2
        assert "something broke" in capsys.readouterr().err

    def test_unsupported_target_is_3(self, tmp_path, build_server):
        src = tmp_path / "main.cob"
        src.write_bytes(b"x")
        assert main(["compile", str(src), "--language", "cobol",
                     "--server", build_server]) == 3

    def test_unreachable_server_is_3(self, tmp_path):
        src = tmp_path / "main.c"
        src.write_bytes(b"x")
        assert main(["compile", str(src), "--language", "stub",
                     "--server", "http://127.0.0.1:1"]) == 3

    def test_server_discovered_through_registry(self, tmp_path, registry_server,
                                                build_server):
        url, store = registry_server
        store.servers_path.write_text(json.dumps(
            [{"url": build_server, "platforms": ["any"], "description": "loop"}]))
        src = tmp_path / "main.c"
        src.write_bytes(b"discovered")
        out = tmp_path / "a.bin"
        assert main(["compile", str(src), "--language", "stub", "--registry", url,
                     "-o", str(out)]) == 0
        assert out.read_bytes() == b"discovered"


class TestRemoteArtifactRun:
    def test_fetched_component_with_http_artifact_runs(self, tmp_path, catalog,
                                                       capsys):
        # publish a wrapped component whose artifact is served over HTTP,
        # fetch its descriptor into the project dir, and run against it
        import sys
        from comodi.gluegen import emit_glue, parse_signature
        from comodi.httpjson import start_server
        from comodi.model import GlobalName, Version
        from comodi.registry import RegistryApp, RegistryStore

        sig = parse_signature("routine add(a: real64 in, b: real64 in) -> real64")
        bundle = emit_glue(sig, name=GlobalName.parse("org.remote.adder"),
                           version=Version(1, 0, 0))
        webroot = tmp_path / "webroot"
        webroot.mkdir()
        glue_dir = webroot / "pkg"
        glue_dir.mkdir()
        (glue_dir / "add_glue.py").write_text(bundle.glue_source)
        (glue_dir / "add.py").write_text("def add(a, b):\n    return a + b\n")
        import zipapp
        artifact = webroot / "adder.pyz"
        zipapp.create_archive(glue_dir, artifact, main="add_glue:main")

        store = RegistryStore(tmp_path / "reg")
        server = start_server(RegistryApp(store), static_root=webroot)
        host, port = server.server_address[:2]
        url = f"http://{host}:{port}"
        try:
            import dataclasses
            descriptor = dataclasses.replace(
                bundle.descriptor_skeleton,
                implementation=dataclasses.replace(
                    bundle.descriptor_skeleton.implementation,
                    artifact=f"{url}/adder.pyz",
                    entry=f"{sys.executable} {{ARTIFACT}}"))
            from comodi.model import serialize_descriptor
            publish_path = tmp_path / "adder.comodi.json"
            publish_path.write_text(serialize_descriptor(descriptor))
            assert main(["publish", str(publish_path), "--artifact", f"{url}/adder.pyz",
                         "--registry", url]) == 0

            workdir = tmp_path / "consumer"
            workdir.mkdir()
            fetched = workdir / "adder.comodi.json"
            assert main(["fetch", "org.remote.adder", "--latest", "--registry", url,
                         "-o", str(fetched)]) == 0

            project = workdir / "remote.project.json"
            for argv in (
                ["project", "new", str(project)],
                ["project", "add", str(project), "a", f"{EX}.const", "1.0.0",
                 "--param", "value=20.0"],
                ["project", "add", str(project), "b", f"{EX}.const", "1.0.0",
                 "--param", "value=22.0"],
                ["project", "add", str(project), "plus", "org.remote.adder", "1.0.0"],
                ["project", "connect", str(project), "a.x", "plus.a"],
                ["project", "connect", str(project), "b.x", "plus.b"],
            ):
                assert main(argv) == 0
            report_path = workdir / "r.json"
            assert main(["run", str(project), "--report", str(report_path)]) == 0
            report = json.loads(report_path.read_text())
            by_id = {n["id"]: n for n in report["nodes"]}
            assert by_id["plus"]["outputs"]["result"] == 42.0
        finally:
            server.shutdown()
            server.server_close()


class TestGlueEndToEnd:
    def test_wrap_compile_run_returns_five(self, tmp_path, build_server, capsys):
        name = "org.comodi.examples.addwrapped"
        sig = tmp_path / "add.sig"
        sig.write_text(ADD_SIG)
        assert main(["wrap", str(sig), "--name", name, "--version", "1.0.0",
                     "--json"]) == 0
        wrap_out = json.loads(capsys.readouterr().out)
        (tmp_path / "add.py").write_text("def add(a, b):\n    return a + b\n")

        artifact = tmp_path / "add.pyz"
        assert main(["compile", wrap_out["glue"], str(tmp_path / "add.py"),
                     "--language", "python", "--entry", wrap_out["entry_hint"],
                     "--server", build_server, "-o", str(artifact),
                     "--update-descriptor", wrap_out["descriptor"]]) == 0
        assert artifact.exists()
        descriptor_text = Path(wrap_out["descriptor"]).read_text()
        assert str(artifact) in descriptor_text

        project = tmp_path / "calc.project.json"
        assert main(["project", "new", str(project)]) == 0
        assert main(["project", "add", str(project), "a", f"{EX}.const", "1.0.0",
                     "--param", "value=2.0"]) == 0
        assert main(["project", "add", str(project), "b", f"{EX}.const", "1.0.0",
                     "--param", "value=3.0"]) == 0
        assert main(["project", "add", str(project), "plus", name, "1.0.0"]) == 0
        assert main(["project", "connect", str(project), "a.x", "plus.a"]) == 0
        assert main(["project", "connect", str(project), "b.x", "plus.b"]) == 0
        report_path = tmp_path / "calc.report.json"
        assert main(["run", str(project), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        by_id = {n["id"]: n for n in report["nodes"]}
        assert by_id["plus"]["outputs"]["result"] == 5.0
