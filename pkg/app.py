#!/usr/bin/env python3
"""
Parabolics - command line interface

Word problem, chamber geometry and parabolic subgroup intersections for graph
products of cyclic groups and for Coxeter groups.
"""

import functools
import logging
import os
import sys
from pathlib import Path

import click
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()
from app.services.coxeter import CoxeterGroup
from app.services.errors import InvariantViolation, ParabolicsError, SpecMismatchError
from app.services.geometry import wall_key
from app.services.oracle import (
    cox_enumerate_ball,
    cox_run_campaign,
    cox_verify_instance,
    enumerate_ball,
    oracle_reduce,
    run_campaign,
    run_instances,
)
from app.services.parabolic import ParabolicService, SectorRef
from app.services.presentation import CoxeterSpec, GroupSpec, load_spec, underlying_coxeter
from app.services.words import Syllable, WordEngine

# Configure logging; stdout carries results only
logging.basicConfig(
    level=os.environ.get('PARABOLICS_LOG_LEVEL', 'INFO').upper(),
    stream=sys.stderr,
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)
logger = logging.getLogger(__name__)

VERSION = '1.0.0'


def domain_errors(command):
    """Report ParabolicsError as 'error: <code>: <message>' and exit 1"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ParabolicsError as e:
            logger.debug(f"{command.__name__} failed: {str(e)}")
            click.echo(f"error: {e.one_line()}", err=True)
            sys.exit(1)
    return wrapper


def _read_lines(path: str):
    for raw in Path(path).read_text(encoding='utf-8').splitlines():
        line = raw.split('#', 1)[0].strip()
        if line:
            yield line


def _dotted(text: str) -> str:
    """Instance files write words with '.' between syllables"""
    return text.replace('.', ' ')


def create_cli():
    """Create and configure the command group"""
    config = {
        'BALL_CAP': int(os.environ.get('PARABOLICS_BALL_CAP', 200000)),
        'EXPONENT_BOUND': int(os.environ.get('PARABOLICS_EXPONENT_BOUND', 2)),
        'ORACLE_BOUND': int(os.environ.get('PARABOLICS_ORACLE_BOUND', 12)),
        'VERIFY_WORKERS': int(os.environ.get('PARABOLICS_VERIFY_WORKERS', 4)),
    }

    def load(ctx):
        obj = ctx.obj
        if 'SPEC' not in obj:
            if not obj.get('SPEC_PATH'):
                raise click.UsageError("Missing option '--spec' (or PARABOLICS_SPEC)", ctx=ctx)
            obj['SPEC'] = load_spec(obj['SPEC_PATH'])
        return obj['SPEC']

    def group_services(ctx):
        """Word engine, geometry and parabolic service for a GroupSpec file"""
        obj = ctx.obj
        if 'PARABOLIC' not in obj:
            spec = load(ctx)
            if isinstance(spec, CoxeterSpec):
                raise SpecMismatchError(f"{obj['SPEC_PATH']} is a Coxeter system; use the 'cox' subcommands")
            engine = WordEngine(spec)
            obj['ENGINE'] = engine
            obj['PARABOLIC'] = ParabolicService(engine, obj['EXPONENT_BOUND'])
            obj['GEOMETRY'] = obj['PARABOLIC'].geometry
        return obj['ENGINE'], obj['GEOMETRY'], obj['PARABOLIC']

    def coxeter_group(ctx) -> CoxeterGroup:
        obj = ctx.obj
        if 'COXETER' not in obj:
            spec = load(ctx)
            if isinstance(spec, GroupSpec):
                if any(order != 2 for order in spec.orders):
                    raise SpecMismatchError(
                        f"{obj['SPEC_PATH']} is a graph product with vertex groups of order other than 2")
                spec = underlying_coxeter(spec)
            obj['COXETER'] = CoxeterGroup(spec)
        return obj['COXETER']

    def spec_name(ctx) -> str:
        return Path(ctx.obj['SPEC_PATH']).stem

    @click.group()
    @click.option('--spec', 'spec_path', envvar='PARABOLICS_SPEC',
                  type=click.Path(exists=True, dir_okay=False), help='Group file (graph product or coxeter).')
    @click.version_option(VERSION, prog_name='parabolics')
    @click.pass_context
    def cli(ctx, spec_path):
        """Parabolic subgroups of graph products and Coxeter groups"""
        ctx.ensure_object(dict)
        ctx.obj.update(config)
        ctx.obj['SPEC_PATH'] = spec_path

    # -- words -------------------------------------------------------------

    @cli.command()
    @click.argument('word')
    @click.option('--check', is_flag=True, help='Cross-check against the exhaustive rewrite oracle.')
    @click.pass_context
    @domain_errors
    def normalize(ctx, word, check):
        """Canonical normal form of WORD"""
        engine, _, _ = group_services(ctx)
        raw = engine.parse_raw_word(word)
        result = engine.reduce(raw)
        if check and oracle_reduce(raw, engine.spec, ctx.obj['ORACLE_BOUND']) != result:
            raise InvariantViolation(f"Oracle disagrees on the normal form of {word!r}")
        click.echo(engine.format_word(result))

    @cli.command()
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def mul(ctx, first, second):
        """Product FIRST * SECOND"""
        engine, _, _ = group_services(ctx)
        click.echo(engine.format_word(engine.multiply(engine.parse_word(first), engine.parse_word(second))))

    @cli.command()
    @click.argument('word')
    @click.pass_context
    @domain_errors
    def inv(ctx, word):
        engine, _, _ = group_services(ctx)
        click.echo(engine.format_word(engine.invert(engine.parse_word(word))))

    @cli.command(name='len')
    @click.argument('word')
    @click.pass_context
    @domain_errors
    def length(ctx, word):
        """Syllable length of WORD"""
        engine, _, _ = group_services(ctx)
        click.echo(engine.syllable_length(engine.parse_word(word)))

    @cli.command()
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def dist(ctx, first, second):
        """Gallery distance between two chambers"""
        engine, _, _ = group_services(ctx)
        click.echo(engine.distance(engine.parse_word(first), engine.parse_word(second)))

    @cli.command()
    @click.argument('word')
    @click.option('--right', is_flag=True, help='Right descents instead of left descents.')
    @click.pass_context
    @domain_errors
    def descents(ctx, word, right):
        engine, _, _ = group_services(ctx)
        x = engine.parse_word(word)
        found = engine.right_descents(x) if right else engine.left_descents(x)
        tokens = [engine.format_word([Syllable(gen, exp)]) for gen, exp in sorted(found)]
        click.echo('{' + ','.join(tokens) + '}')

    # -- geometry ----------------------------------------------------------

    @cli.command()
    @click.option('--base', default='e', show_default=True, help='A chamber of the sector.')
    @click.option('--types', 'types_text', required=True, help='Sector type, e.g. {a,b}.')
    @click.argument('chamber')
    @click.pass_context
    @domain_errors
    def project(ctx, base, types_text, chamber):
        """Projection of CHAMBER onto the sector base*Sigma_types"""
        engine, _, _ = group_services(ctx)
        sector = SectorRef.of(engine, engine.parse_word(base), engine.spec.parse_types(types_text))
        click.echo(engine.format_word(engine.project_to_sector(engine.parse_word(chamber), sector)))

    @cli.command()
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def walls(ctx, first, second):
        """Building-walls separating two chambers, one '<type>,<rep>' per line"""
        engine, geometry, _ = group_services(ctx)
        found = geometry.separating_walls(engine.parse_word(first), engine.parse_word(second))
        for wall in sorted(found, key=wall_key):
            click.echo(geometry.format_wall(wall))

    @cli.command()
    @click.option('--wall', 'wall_text', required=True, help="Wall as '<type>,<rep word>'.")
    @click.argument('chamber')
    @click.pass_context
    @domain_errors
    def dial(ctx, wall_text, chamber):
        """Dial of the wall containing CHAMBER"""
        engine, geometry, _ = group_services(ctx)
        click.echo(geometry.dial_index(geometry.parse_wall(wall_text), engine.parse_word(chamber)))

    # -- parabolics --------------------------------------------------------

    @cli.command()
    @click.option('--p1', required=True, help="First parabolic as '<conjugator>,<types>'.")
    @click.option('--p2', required=True, help="Second parabolic as '<conjugator>,<types>'.")
    @click.pass_context
    @domain_errors
    def intersect(ctx, p1, p2):
        """Intersection of two parabolic subgroups"""
        _, _, parabolic = group_services(ctx)
        result = parabolic.intersect_parabolics(parabolic.parse_parabolic(p1), parabolic.parse_parabolic(p2))
        click.echo(parabolic.format_parabolic(result))

    @cli.command()
    @click.option('--types-i', 'types_i', required=True)
    @click.option('--gamma', default='e', show_default=True)
    @click.option('--types-j', 'types_j', required=True)
    @click.pass_context
    @domain_errors
    def cplus(ctx, types_i, gamma, types_j):
        """Projection of the sector gamma*Sigma_J onto Sigma_I"""
        engine, _, parabolic = group_services(ctx)
        sector = parabolic.c_plus(engine.spec.parse_types(types_i), engine.parse_word(gamma),
                                  engine.spec.parse_types(types_j))
        click.echo(parabolic.format_sector(sector))

    @cli.command()
    @click.option('--chambers', 'chambers_path', required=True, type=click.Path(exists=True, dir_okay=False),
                  help='File with one chamber word per line.')
    @click.pass_context
    @domain_errors
    def recognize(ctx, chambers_path):
        """Decide whether a chamber set is a ball of a sector"""
        engine, _, parabolic = group_services(ctx)
        chambers = [engine.parse_word(line) for line in _read_lines(chambers_path)]
        found = parabolic.sector_recognize(chambers)
        if found is None:
            click.echo('none')
        else:
            sector, radius = found
            click.echo(f"{parabolic.format_sector(sector)} radius={radius}")

    # -- verification and export --------------------------------------------

    @cli.command()
    @click.option('--radius', default=3, show_default=True, type=click.IntRange(0))
    @click.option('--trials', default=20, show_default=True, type=click.IntRange(0))
    @click.option('--seed', default=0, show_default=True, type=int)
    @click.option('--instances', 'instances_path', type=click.Path(exists=True, dir_okay=False),
                  help="File of '<conj1>,<types1> <conj2>,<types2>' lines.")
    @click.pass_context
    @domain_errors
    def verify(ctx, radius, trials, seed, instances_path):
        """Check the intersection theorem against brute force on a ball"""
        engine, _, parabolic = group_services(ctx)
        obj = ctx.obj
        if instances_path:
            ball = enumerate_ball(engine.spec, radius, obj['BALL_CAP'], obj['EXPONENT_BOUND'])
            jobs = []
            for line in _read_lines(instances_path):
                tokens = line.split()
                if len(tokens) != 2:
                    raise click.UsageError(f"Instance line needs two parabolics: {line!r}", ctx=ctx)
                first, second = (parabolic.parse_parabolic(_dotted(t)) for t in tokens)
                jobs.append((spec_name(ctx), parabolic, ball, first, second))
            reports = run_instances(jobs, radius, obj['VERIFY_WORKERS'])
        else:
            reports = run_campaign([(spec_name(ctx), engine.spec)], trials, radius, seed,
                                   obj['VERIFY_WORKERS'], obj['BALL_CAP'], obj['EXPONENT_BOUND'])
        for report in reports:
            click.echo(report.line())
        if any(not report.ok for report in reports):
            sys.exit(1)

    @cli.command(name='export-ball')
    @click.option('--radius', default=2, show_default=True, type=click.IntRange(0))
    @click.option('--format', 'fmt', type=click.Choice(['dot', 'json']), default='dot', show_default=True)
    @click.option('--wall', 'wall_text', help="Colour chambers by their dial around '<type>,<rep>'.")
    @click.pass_context
    @domain_errors
    def export_ball(ctx, radius, fmt, wall_text):
        """Chamber graph ball around the base chamber"""
        engine, geometry, _ = group_services(ctx)
        ball = enumerate_ball(engine.spec, radius, ctx.obj['BALL_CAP'], ctx.obj['EXPONENT_BOUND'])
        wall = geometry.parse_wall(wall_text) if wall_text else None
        click.echo(geometry.export_ball(ball, fmt, wall))

    # -- Coxeter groups ----------------------------------------------------

    @cli.group()
    def cox():
        """The same queries in a Coxeter group (letter length, reflections)"""

    @cox.command(name='normalize')
    @click.argument('word')
    @click.pass_context
    @domain_errors
    def cox_normalize(ctx, word):
        group = coxeter_group(ctx)
        click.echo(group.format_word(group.parse_word(word)))

    @cox.command(name='mul')
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def cox_mul(ctx, first, second):
        group = coxeter_group(ctx)
        click.echo(group.format_word(group.multiply(group.parse_word(first), group.parse_word(second))))

    @cox.command(name='inv')
    @click.argument('word')
    @click.pass_context
    @domain_errors
    def cox_inv(ctx, word):
        group = coxeter_group(ctx)
        click.echo(group.format_word(group.inverse(group.parse_word(word))))

    @cox.command(name='len')
    @click.argument('word')
    @click.pass_context
    @domain_errors
    def cox_len(ctx, word):
        group = coxeter_group(ctx)
        click.echo(group.length(group.parse_raw_word(word)))

    @cox.command(name='dist')
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def cox_dist(ctx, first, second):
        group = coxeter_group(ctx)
        click.echo(group.distance(group.parse_word(first), group.parse_word(second)))

    @cox.command(name='descents')
    @click.argument('word')
    @click.option('--right', is_flag=True)
    @click.pass_context
    @domain_errors
    def cox_descents(ctx, word, right):
        group = coxeter_group(ctx)
        w = group.parse_word(word)
        found = group.right_descents(w) if right else group.left_descents(w)
        click.echo(group.spec.format_types(found))

    @cox.command(name='walls')
    @click.argument('first')
    @click.argument('second')
    @click.pass_context
    @domain_errors
    def cox_walls(ctx, first, second):
        """Reflections separating two elements, in gallery order"""
        group = coxeter_group(ctx)
        for reflection in group.reflections_between(group.parse_word(first), group.parse_word(second)):
            click.echo(group.format_word(reflection.element))

    @cox.command(name='intersect')
    @click.option('--p1', required=True)
    @click.option('--p2', required=True)
    @click.pass_context
    @domain_errors
    def cox_intersect(ctx, p1, p2):
        group = coxeter_group(ctx)
        result = group.intersect_parabolics(group.parse_parabolic(p1), group.parse_parabolic(p2))
        click.echo(group.format_parabolic(result))

    @cox.command(name='verify')
    @click.option('--radius', default=4, show_default=True, type=click.IntRange(0))
    @click.option('--trials', default=20, show_default=True, type=click.IntRange(0))
    @click.option('--seed', default=0, show_default=True, type=int)
    @click.option('--instances', 'instances_path', type=click.Path(exists=True, dir_okay=False),
                  help="File of '<I> <w> <J>' lines.")
    @click.pass_context
    @domain_errors
    def cox_verify(ctx, radius, trials, seed, instances_path):
        group = coxeter_group(ctx)
        obj = ctx.obj
        if instances_path:
            ball = cox_enumerate_ball(group, radius, obj['BALL_CAP'])
            reports = []
            for line in _read_lines(instances_path):
                tokens = line.split()
                if len(tokens) != 3:
                    raise click.UsageError(f"Instance line needs '<I> <w> <J>': {line!r}", ctx=ctx)
                left, right = group.spec.parse_types(tokens[0]), group.spec.parse_types(tokens[2])
                reports.append(cox_verify_instance(group, left, group.parse_word(_dotted(tokens[1])), right,
                                                   radius, ball, spec_name(ctx), obj['BALL_CAP']))
            reports.sort(key=lambda r: r.line())
        else:
            reports = cox_run_campaign(spec_name(ctx), group, trials, radius, seed,
                                       obj['VERIFY_WORKERS'], obj['BALL_CAP'])
        for report in reports:
            click.echo(report.line())
        if any(not report.ok for report in reports):
            sys.exit(1)

    @cox.command(name='export-ball')
    @click.option('--radius', default=2, show_default=True, type=click.IntRange(0))
    @click.option('--format', 'fmt', type=click.Choice(['dot', 'json']), default='dot', show_default=True)
    @click.pass_context
    @domain_errors
    def cox_export_ball(ctx, radius, fmt):
        group = coxeter_group(ctx)
        click.echo(cox_enumerate_ball(group, radius, ctx.obj['BALL_CAP']).export(group, fmt))

    return cli


if __name__ == '__main__':
    cli = create_cli()
    cli(obj={})
