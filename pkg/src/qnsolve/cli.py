"""Command-line client for the solver service.

Both subcommands talk to the HTTP API.  Without --server the service app
is driven in process, so no separate server is needed; with --server URL
the same requests go to a remote instance.  Any flag can also be supplied
through a plain key=value config file via --config.
"""
from __future__ import annotations

import asyncio
import math

import click
import httpx

from .bench import ProfileTable, RunRecord, emit_profile, emit_results

METHOD_CHOICES = ("qn1", "qn2", "qn3", "qn4")
B0_CHOICES = ("identity", "scaled-identity", "finite-difference")


def _read_config(ctx: click.Context, param: click.Parameter, value: str | None):
    """Load key=value lines as defaults for the current subcommand."""
    if not value:
        return value
    # accept the flag spelling (method) as well as the internal parameter
    # name (methods) for flags whose two names differ
    names = {}
    for p in ctx.command.params:
        names[p.name] = p
        for opt in p.opts:
            names[opt.lstrip("-").replace("-", "_")] = p
    defaults = {}
    with open(value) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.BadParameter(f"expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            target = names.get(key)
            if target is None:
                raise click.BadParameter(f"unknown config key {key!r}")
            if getattr(target, "multiple", False):
                # repeatable flags take comma- or space-separated lists
                defaults[target.name] = tuple(val.replace(",", " ").split())
            else:
                defaults[target.name] = val.strip()
    ctx.default_map = {**defaults, **(ctx.default_map or {})}
    return value


def _config_option(f):
    return click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        callback=_read_config,
        is_eager=True,
        expose_value=False,
        help="key=value file supplying defaults for any flag",
    )(f)


async def _post_local(path: str, payload: dict) -> httpx.Response:
    from .service.app import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://qnsolve.internal", timeout=None
    ) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        if server:
            with httpx.Client(base_url=server, timeout=600.0) as client:
                resp = client.post(path, json=payload)
        else:
            resp = asyncio.run(_post_local(path, payload))
    except httpx.HTTPError as exc:
        raise click.ClickException(f"request to {server or 'in-process app'} failed: {exc}")
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _settings(tol, max_iter, max_feval, sigma, memory, b0) -> dict:
    return {
        "tol": tol,
        "max_iter": max_iter,
        "max_feval": max_feval,
        "sigma": sigma,
        "memory_depth": memory,
        "b0": b0,
    }


@click.group()
def main():
    """Quasi-Newton nonlinear-system solver and benchmark client."""


@main.command()
@_config_option
@click.option("--problem", required=True, help="registered problem name")
@click.option("--dim", type=int, required=True, help="problem dimension")
@click.option("--method", type=click.Choice(METHOD_CHOICES), default="qn1", show_default=True)
@click.option("--memory", type=int, default=None, help="history depth (default: dimension)")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--max-feval", type=int, default=2000, show_default=True)
@click.option("--sigma", type=float, default=0.1, show_default=True)
@click.option("--b0", type=click.Choice(B0_CHOICES), default="identity", show_default=True)
@click.option("--server", default=None, help="service URL; omit to solve in process")
def solve(problem, dim, method, memory, tol, max_iter, max_feval, sigma, b0, server):
    """Solve one problem instance and print a short report."""
    payload = {
        "problem": problem,
        "dim": dim,
        "method": method,
        "settings": _settings(tol, max_iter, max_feval, sigma, memory, b0),
    }
    data = _post(server, "/solve", payload)
    click.echo(f"problem:    {problem} (n={dim})")
    click.echo(f"method:     {method}")
    click.echo(f"status:     {data['status']}")
    click.echo(f"iterations: {data['iterations']}")
    click.echo(f"fevals:     {data['fevals']}")
    f_norm = data["f_norm"]
    click.echo(f"f_norm:     {'inf' if f_norm is None else format(f_norm, '.6e')}")
    if data["restarts"]:
        click.echo(f"restarts:   {data['restarts']}")


def _parse_problem_entry(entry: str, dim: int | None) -> dict:
    name, sep, d = entry.partition(":")
    if sep:
        try:
            return {"name": name, "dim": int(d)}
        except ValueError:
            raise click.BadParameter(f"bad problem entry {entry!r}; use name:dim")
    if dim is None:
        raise click.BadParameter(f"{entry!r} needs an explicit dimension (name:dim or --dim)")
    return {"name": name, "dim": dim}


@main.command()
@_config_option
@click.option("--method", "methods", multiple=True, type=click.Choice(METHOD_CHOICES),
              help="methods to benchmark (repeatable; default: all four)")
@click.option("--problem", "problems", multiple=True,
              help="problem as name:dim (repeatable; default: full 30-instance suite)")
@click.option("--dim", type=int, default=None, help="dimension for --problem entries without :dim")
@click.option("--memory", type=int, default=None)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--max-feval", type=int, default=2000, show_default=True)
@click.option("--sigma", type=float, default=0.1, show_default=True)
@click.option("--b0", type=click.Choice(B0_CHOICES), default="identity", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="parallel workers")
@click.option("--out-results", default="results.csv", show_default=True)
@click.option("--out-profile-iters", default="profile_iters.csv", show_default=True)
@click.option("--out-profile-fevals", default="profile_fevals.csv", show_default=True)
@click.option("--server", default=None, help="service URL; omit to run in process")
def bench(methods, problems, dim, memory, tol, max_iter, max_feval, sigma, b0,
          jobs, out_results, out_profile_iters, out_profile_fevals, server):
    """Run the benchmark suite and write results plus both profiles as CSV."""
    payload = {
        "methods": list(methods) or list(METHOD_CHOICES),
        "settings": _settings(tol, max_iter, max_feval, sigma, memory, b0),
        "jobs": jobs,
    }
    if problems:
        payload["problems"] = [_parse_problem_entry(e, dim) for e in problems]
    data = _post(server, "/bench", payload)

    records = [
        RunRecord(
            problem=r["problem"],
            n=r["n"],
            method=r["method"],
            status=r["status"],
            iterations=r["iterations"],
            fevals=r["fevals"],
            f_norm_final=math.inf if r["f_norm_final"] is None else r["f_norm_final"],
            wall_time_ms=r["wall_time_ms"],
        )
        for r in data["records"]
    ]
    emit_results(records, out_results)
    for key, path in (
        ("profile_iterations", out_profile_iters),
        ("profile_fevals", out_profile_fevals),
    ):
        emit_profile(ProfileTable(**data[key]), path)

    solved = {}
    for r in records:
        solved.setdefault(r.method, [0, 0])
        solved[r.method][1] += 1
        if r.status == "converged":
            solved[r.method][0] += 1
    for method, (good, total) in solved.items():
        click.echo(f"{method}: {good}/{total} solved")
    click.echo(f"results written to {out_results}")
    click.echo(f"profiles written to {out_profile_iters}, {out_profile_fevals}")


@main.command()
@_config_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    uvicorn.run("qnsolve.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
