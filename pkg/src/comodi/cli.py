"""comodi: wrap routines, compile, publish, compose, validate, run, serve.

Exit codes:

====  =====================================================================
0     success
1     user error: bad invocation, unknown subcommand or flag, missing or
      unreadable input file, no endpoint configured, no search criterion
2     validation failure: signature/descriptor/project syntax or invariant
      violations, refused connects/replacements, failed compile results,
      failed or skipped run nodes
3     remote/IO failure: unreachable registry or compile server, remote
      error payloads (duplicate publish, not found, unsupported target),
      output write failures
====  =====================================================================

With ``--json`` every subcommand prints exactly one JSON document on
stdout (``{"ok": false, "error": {"code", "detail"}}`` on failure);
human-readable text otherwise.  Diagnostics always go to stderr.
Remote errors never corrupt local files: every file write is
temp-then-rename.

Registry and compile-server endpoints resolve in order: flag
(``--registry`` / ``--server``), environment (``COMODI_REGISTRY`` /
``COMODI_COMPILE_SERVER``), config file (``--config PATH``, default
``./comodi.config.json`` with keys ``registry`` and ``compile_server``),
and finally — for the compile server — the registry's compile-server
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

from .builtins import standard_catalog
from .buildsvc import BuildRequestError, CompileRequest, SourceFile, remote_compile
from .engine import EngineError, ProjectNotRunnable, run, serialize_report
from .gluegen import GlueError, SignatureError, emit_glue, parse_signature
from .httpjson import NetworkError, start_server
from .model import (
    DescriptorError,
    GlobalName,
    Version,
    parse_datatype,
    parse_descriptor,
    serialize_descriptor,
)
from .registry import RegistryClient, RegistryError, SearchQuery
from .resolve import ChainResolver, FileResolver, RegistryResolver, StandardArtifactResolver
from .serveapi import ProjectSession, ServeApp
from .wiring import (
    PortRef,
    Project,
    ProjectMeta,
    ProjectNode,
    WiringError,
    parse_project,
    replace_node,
    serialize_project,
    connect,
    validate_project,
)

__all__ = ["main"]

ENV_REGISTRY = "COMODI_REGISTRY"
ENV_COMPILE_SERVER = "COMODI_COMPILE_SERVER"
DEFAULT_CONFIG = "comodi.config.json"

EXIT_OK = 0
EXIT_USER = 1
EXIT_VALIDATION = 2
EXIT_REMOTE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would sys.exit(2)
        raise UsageError(message)


def _atomic_write(path: Path, data: str | bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    if isinstance(data, bytes):
        tmp.write_bytes(data)
    else:
        tmp.write_text(data, encoding="utf-8")
    tmp.replace(path)


def _read_input(path: Path) -> str:
    """Read a user-supplied file; missing/unreadable files are usage errors."""
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _emit(args: argparse.Namespace, payload: dict, human: str) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"ok": True, **payload}))
    elif human:
        print(human)
    return EXIT_OK


def _fail(args: argparse.Namespace, exit_code: int, code: str, detail: str,
          extra: dict | None = None) -> int:
    print(f"error: {detail}", file=sys.stderr)
    if getattr(args, "json", False):
        payload: dict[str, Any] = {"ok": False, "error": {"code": code, "detail": detail}}
        if extra:
            payload.update(extra)
        print(json.dumps(payload))
    return exit_code


# ---------------------------------------------------------------------------
# Endpoint + resolver wiring

def _load_config(args: argparse.Namespace) -> dict:
    explicit = getattr(args, "config", None)
    path = Path(explicit) if explicit else Path(DEFAULT_CONFIG)
    if explicit and not path.exists():
        raise UsageError(f"config file not found: {path}")
    if path.exists():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}")
    return {}


def _registry_url(args: argparse.Namespace) -> str | None:
    return getattr(args, "registry", None) or os.environ.get(ENV_REGISTRY) \
        or _load_config(args).get("registry")


def _registry_client(args: argparse.Namespace) -> RegistryClient:
    url = _registry_url(args)
    if not url:
        raise UsageError("no registry configured (use --registry, "
                         f"{ENV_REGISTRY}, or the config file)")
    return RegistryClient(url)


def _compile_server_url(args: argparse.Namespace) -> str:
    url = getattr(args, "server", None) or os.environ.get(ENV_COMPILE_SERVER) \
        or _load_config(args).get("compile_server")
    if url:
        return url
    registry_url = _registry_url(args)
    if registry_url:
        servers = RegistryClient(registry_url).list_compile_servers()
        if servers:
            return servers[0].url
    raise UsageError("no compile server configured (use --server, "
                     f"{ENV_COMPILE_SERVER}, the config file, or register one)")


def _build_resolvers(args: argparse.Namespace, anchor: Path | None):
    """Descriptor resolver chain and artifact resolver for project commands."""
    catalog = standard_catalog()
    dirs = []
    if anchor is not None:
        dirs.append(anchor if anchor.is_dir() else anchor.parent)
    cwd = Path.cwd()
    if cwd not in dirs:
        dirs.append(cwd)
    chain = [catalog.resolve] + [FileResolver(d) for d in dirs]
    registry = None
    url = _registry_url(args)
    if url:
        registry = RegistryClient(url)
        chain.append(RegistryResolver(registry))
    resolver = ChainResolver(chain)
    artifacts = StandardArtifactResolver(catalog, search_dirs=dirs)
    return resolver, artifacts, registry, catalog


def _load_project(path: Path) -> Project:
    return parse_project(_read_input(path))


def _save_project(path: Path, project: Project) -> None:
    _atomic_write(path, serialize_project(project))


# ---------------------------------------------------------------------------
# Subcommands

def cmd_wrap(args: argparse.Namespace) -> int:
    sig_path = Path(args.signature)
    sig = parse_signature(_read_input(sig_path))
    name = GlobalName.parse(args.name) if args.name else None
    version = Version.parse(args.version) if args.version else None
    bundle = emit_glue(sig, template=args.template, name=name, version=version)

    out_dir = Path(args.out_dir) if args.out_dir else sig_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    descriptor_path = out_dir / f"{sig_path.stem}.comodi.json"
    glue_path = out_dir / f"{sig.routine}_glue.py"
    _atomic_write(descriptor_path, serialize_descriptor(bundle.descriptor_skeleton))
    _atomic_write(glue_path, bundle.glue_source)
    entry_hint = f"{sig.routine}_glue:main"
    return _emit(args, {
        "descriptor": str(descriptor_path),
        "glue": str(glue_path),
        "component": bundle.descriptor_skeleton.key(),
        "entry_hint": entry_hint,
    }, f"wrote {descriptor_path} and {glue_path}\n"
       f"component {bundle.descriptor_skeleton.key()}, compile entry hint {entry_hint}")


def cmd_compile(args: argparse.Namespace) -> int:
    sources = []
    for source in args.sources:
        path = Path(source)
        try:
            sources.append(SourceFile(path=path.name, content=path.read_bytes()))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}")
    server = _compile_server_url(args)
    request = CompileRequest(platform=args.platform, language=args.language,
                             sources=tuple(sources), entry_hint=args.entry or "")
    result = remote_compile(server, request)
    if result.status != "ok":
        for diag in result.diagnostics:
            print(f"{diag.file}:{diag.line}: {diag.message}", file=sys.stderr)
        if result.log.strip():
            print(result.log.strip(), file=sys.stderr)
        return _fail(args, EXIT_VALIDATION, "COMPILE_FAILED",
                     "compilation failed (see diagnostics)",
                     extra={"result": result.to_obj()})
    out_path = Path(args.output)
    try:
        _atomic_write(out_path, result.artifact)
    except OSError as exc:
        return _fail(args, EXIT_REMOTE, "IO", f"cannot write artifact: {exc}")
    if args.update_descriptor:
        descriptor_path = Path(args.update_descriptor)
        descriptor = parse_descriptor(_read_input(descriptor_path))
        if descriptor.implementation is None:
            return _fail(args, EXIT_VALIDATION, "INVALID",
                         f"{descriptor_path} is not an elementary descriptor")
        import dataclasses
        updated = dataclasses.replace(
            descriptor, implementation=dataclasses.replace(
                descriptor.implementation, artifact=str(out_path)))
        _atomic_write(descriptor_path, serialize_descriptor(updated))
    return _emit(args, {"artifact": str(out_path), "bytes": len(result.artifact)},
                 f"wrote artifact {out_path} ({len(result.artifact)} bytes)")


def cmd_publish(args: argparse.Namespace) -> int:
    descriptor = parse_descriptor(_read_input(Path(args.descriptor)))
    client = _registry_client(args)
    record = client.register(descriptor, artifact_url=args.artifact,
                             publisher=args.publisher or "")
    return _emit(args, {"record": record.to_obj()},
                 f"published {record.key()} (downloads: {record.download_count})")


def cmd_search(args: argparse.Namespace) -> int:
    client = _registry_client(args)
    query = SearchQuery(
        text=args.text,
        tag_prefix=args.tag,
        provides_type=parse_datatype(args.provides_type) if args.provides_type else None,
        uses_type=parse_datatype(args.uses_type) if args.uses_type else None,
        limit=args.limit,
    )
    if not query.criteria_set():
        raise UsageError("set at least one of --text/--tag/--provides-type/--uses-type")
    records = client.search(query)
    lines = [f"{r.key():<50} downloads={r.download_count:<6} {r.descriptor.doc.summary}"
             for r in records]
    return _emit(args, {"records": [r.to_obj() for r in records]},
                 "\n".join(lines) if lines else "no components matched")


def cmd_fetch(args: argparse.Namespace) -> int:
    client = _registry_client(args)
    version = "latest" if args.latest or not args.version else args.version
    record = client.fetch(args.name, version)
    count = client.record_download(str(record.descriptor.name),
                                   str(record.descriptor.version))
    written = None
    if args.output:
        path = Path(args.output)
        try:
            _atomic_write(path, serialize_descriptor(record.descriptor))
        except OSError as exc:
            return _fail(args, EXIT_REMOTE, "IO", f"cannot write descriptor: {exc}")
        written = str(path)
    return _emit(args, {"record": record.to_obj(), "download_count": count,
                        "written": written},
                 f"fetched {record.key()} (artifact: {record.artifact_url}, "
                 f"downloads now {count})"
                 + (f"\nwrote {written}" if written else ""))


def cmd_project_new(args: argparse.Namespace) -> int:
    path = Path(args.file)
    if path.exists():
        raise UsageError(f"{path} already exists")
    project = Project(meta=ProjectMeta(title=args.title or path.stem,
                                       description=args.description or ""))
    _save_project(path, project)
    return _emit(args, {"project": str(path)}, f"created {path}")


def cmd_project_add(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    if args.id in project.nodes:
        return _fail(args, EXIT_VALIDATION, "DUPLICATE_NODE",
                     f"node {args.id!r} already exists")
    params: dict[str, object] = {}
    for binding in args.param or []:
        key, sep, raw = binding.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {binding!r}")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    node = ProjectNode(component=GlobalName.parse(args.component),
                       version=Version.parse(args.version), params=params)
    _save_project(path, project.with_node(args.id, node))
    return _emit(args, {"node": args.id},
                 f"added {args.id} = {args.component}@{args.version}")


def cmd_project_connect(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    resolver, _, _, _ = _build_resolvers(args, path)
    updated = connect(project, PortRef.parse(args.src), PortRef.parse(args.dst), resolver)
    _save_project(path, updated)
    return _emit(args, {"src": args.src, "dst": args.dst},
                 f"connected {args.src} -> {args.dst}")


def cmd_project_replace(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    resolver, _, _, _ = _build_resolvers(args, path)
    try:
        candidate = resolver(GlobalName.parse(args.component), Version.parse(args.version))
    except LookupError as exc:
        return _fail(args, EXIT_VALIDATION, "UNKNOWN_COMPONENT", str(exc))
    updated = replace_node(project, args.node, candidate, resolver)
    _save_project(path, updated)
    return _emit(args, {"node": args.node, "component": candidate.key()},
                 f"replaced {args.node} with {candidate.key()}")


def cmd_project_validate(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    resolver, _, _, _ = _build_resolvers(args, path)
    violations = validate_project(project, resolver)
    if violations:
        for v in violations:
            print(str(v), file=sys.stderr)
        if getattr(args, "json", False):
            print(json.dumps({"ok": False, "violations": [v.to_obj() for v in violations]}))
        return EXIT_VALIDATION
    return _emit(args, {"violations": []}, f"{path}: ok")


def cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    resolver, artifacts, _, _ = _build_resolvers(args, path)
    report = run(project, resolver, artifacts)
    document = serialize_report(report)
    if args.report:
        try:
            _atomic_write(Path(args.report), document)
        except OSError as exc:
            return _fail(args, EXIT_REMOTE, "IO", f"cannot write report: {exc}")
    failed = [n for n in report.nodes if n.status != "ok"]
    if getattr(args, "json", False):
        print(json.dumps({"ok": not failed,
                          "report": json.loads(document),
                          "report_path": args.report}))
    else:
        for n in report.nodes:
            summary = ", ".join(f"{k}={_short_value(v)}"
                                for k, v in sorted(n.outputs.items()))
            line = f"{n.node_id:<24} {n.status:<8} {summary}"
            if n.status != "ok":
                line += f" [{n.error_code}: {n.error_detail}]"
            print(line)
        print(f"total {report.node_count} nodes in {report.wall_ns / 1e6:.2f} ms")
    if failed:
        print(f"error: {len(failed)} node(s) did not complete", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _short_value(value) -> str:
    from .engine import encode_value
    text = encode_value(value)
    return text if len(text) <= 48 else text[:45] + "..."


def cmd_serve(args: argparse.Namespace) -> int:
    path = Path(args.file)
    project = _load_project(path)
    resolver, artifacts, registry, catalog = _build_resolvers(args, path)
    session = ProjectSession(project, path, resolver, artifacts,
                             registry=registry, catalog=catalog)
    server = start_server(ServeApp(session), host=args.host, port=args.port,
                          background=False, static_root=args.ui)
    host, port = server.server_address[:2]
    print(f"serving {path} on http://{host}:{port}/api/project", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable JSON on stdout")
    common.add_argument("--registry", default=argparse.SUPPRESS, metavar="URL",
                        help="registry base URL")
    common.add_argument("--server", default=argparse.SUPPRESS, metavar="URL",
                        help="compile server base URL")
    common.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH",
                        help=f"config file (default ./{DEFAULT_CONFIG})")

    parser = _Parser(prog="comodi", parents=[common],
                     description="Component integration for computational science.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    p = sub.add_parser("wrap", parents=[common],
                       help="wrap a routine declaration as a component")
    p.add_argument("signature", help="signature declaration file (.sig)")
    p.add_argument("--template", default="python-subprocess")
    p.add_argument("--name", help="component global name (default local.wrapped.<routine>)")
    p.add_argument("--version", help="component version (default 0.1.0)")
    p.add_argument("--out-dir", help="output directory (default: beside the .sig)")
    p.set_defaults(func=cmd_wrap)

    p = sub.add_parser("compile", parents=[common], help="submit sources to a compile server")
    p.add_argument("sources", nargs="+", help="source files (bundled under their basenames)")
    p.add_argument("--platform", default="any")
    p.add_argument("--language", default="python")
    p.add_argument("--entry", help="entry hint passed to the toolchain ({ENTRY})")
    p.add_argument("-o", "--output", default="artifact.bin")
    p.add_argument("--update-descriptor", metavar="PATH",
                   help="point this descriptor's artifact at the built file")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("publish", parents=[common], help="register a component descriptor")
    p.add_argument("descriptor", help="descriptor file (.comodi.json)")
    p.add_argument("--artifact", required=True, help="artifact locator to publish")
    p.add_argument("--publisher", help="publisher name")
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("search", parents=[common], help="search the registry")
    p.add_argument("--text")
    p.add_argument("--tag", help="classification path prefix")
    p.add_argument("--provides-type", dest="provides_type",
                   help="scalar kind or datatype JSON")
    p.add_argument("--uses-type", dest="uses_type")
    p.add_argument("--limit", type=int, default=50)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fetch", parents=[common],
                       help="fetch a descriptor and record a download")
    p.add_argument("name")
    p.add_argument("--version", help="exact version (default: latest)")
    p.add_argument("--latest", action="store_true")
    p.add_argument("-o", "--output", help="write the descriptor here")
    p.set_defaults(func=cmd_fetch)

    project = sub.add_parser("project", parents=[common], help="edit project files")
    psub = project.add_subparsers(dest="project_command", metavar="ACTION")

    p = psub.add_parser("new", parents=[common])
    p.add_argument("file")
    p.add_argument("--title")
    p.add_argument("--description")
    p.set_defaults(func=cmd_project_new)

    p = psub.add_parser("add", parents=[common])
    p.add_argument("file")
    p.add_argument("id", help="instance id")
    p.add_argument("component", help="component global name")
    p.add_argument("version")
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=cmd_project_add)

    p = psub.add_parser("connect", parents=[common])
    p.add_argument("file")
    p.add_argument("src", help="provides endpoint, node.port")
    p.add_argument("dst", help="uses endpoint, node.port")
    p.set_defaults(func=cmd_project_connect)

    p = psub.add_parser("replace", parents=[common])
    p.add_argument("file")
    p.add_argument("node")
    p.add_argument("component")
    p.add_argument("version")
    p.set_defaults(func=cmd_project_replace)

    p = psub.add_parser("validate", parents=[common])
    p.add_argument("file")
    p.set_defaults(func=cmd_project_validate)

    p = sub.add_parser("run", parents=[common], help="execute a project")
    p.add_argument("file")
    p.add_argument("--report", help="write the run report here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", parents=[common],
                       help="serve the project API for the studio")
    p.add_argument("file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8723)
    p.add_argument("--ui", help="directory of studio static files to serve")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # keep --json honored even when parsing itself fails
    args = argparse.Namespace(json="--json" in raw)
    try:
        args = parser.parse_args(raw)
        if not getattr(args, "func", None):
            raise UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except UsageError as exc:
        return _fail(args, EXIT_USER, "USAGE", str(exc))
    except (DescriptorError, SignatureError, GlueError) as exc:
        return _fail(args, EXIT_VALIDATION, "INVALID", str(exc))
    except ProjectNotRunnable as exc:
        for v in exc.violations:
            print(str(v), file=sys.stderr)
        return _fail(args, EXIT_VALIDATION, "VALIDATION", str(exc))
    except WiringError as exc:
        return _fail(args, EXIT_VALIDATION, exc.violation.code, str(exc))
    except EngineError as exc:
        return _fail(args, EXIT_VALIDATION, exc.code, str(exc))
    except NetworkError as exc:
        return _fail(args, EXIT_REMOTE, "NETWORK", str(exc))
    except (RegistryError, BuildRequestError) as exc:
        return _fail(args, EXIT_REMOTE, exc.code, str(exc))
    except OSError as exc:
        return _fail(args, EXIT_REMOTE, "IO", str(exc))


if __name__ == "__main__":
    sys.exit(main())
