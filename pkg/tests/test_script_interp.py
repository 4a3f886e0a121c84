"""Interpreter semantics: variables, control flow, expr, procs, limits."""

import pytest

from pnet.errors import (
    AmbiguousCommand,
    DuplicatePackage,
    ExprSyntaxError,
    LimitExceeded,
    ScriptRuntimeError,
    UnknownCommand,
    WrongArity,
)
from pnet.script import Interpreter


@pytest.fixture
def interp():
    return Interpreter()


def test_set_and_get(interp):
    assert interp.eval_text("set x 3") == "3"
    assert interp.eval_text("set x") == "3"
    assert interp.eval_text("puts $x") == ""
    assert interp.output == ["3"]


def test_unset(interp):
    interp.eval_text("set x 1")
    interp.eval_text("unset x")
    with pytest.raises(ScriptRuntimeError):
        interp.eval_text("puts $x")


def test_expr_integer_arithmetic(interp):
    assert interp.eval_text("set x 3; expr $x*2+1") == "7"


def test_expr_float(interp):
    assert interp.eval_text("expr 0.1/2") == "0.05"
    assert interp.eval_text("expr 1.5+1.5") == "3.0"


def test_expr_integer_division_floors(interp):
    assert interp.eval_text("expr 7/2") == "3"
    assert interp.eval_text("expr -7/2") == "-4"
    assert interp.eval_text("expr 7%3") == "1"


def test_expr_division_by_zero(interp):
    with pytest.raises(ScriptRuntimeError):
        interp.eval_text("expr 1/0")
    with pytest.raises(ScriptRuntimeError):
        interp.eval_text("expr 1.0/0.0")


def test_expr_comparisons(interp):
    assert interp.eval_text("expr 2 < 3") == "1"
    assert interp.eval_text("expr 2 >= 3") == "0"
    assert interp.eval_text("expr 1 == 1.0") == "1"
    assert interp.eval_text("expr 1 != 2 && 3 > 2") == "1"
    assert interp.eval_text("expr !1 || 0") == "0"


def test_expr_parentheses_and_unary(interp):
    assert interp.eval_text("expr (1+2)*3") == "9"
    assert interp.eval_text("expr -(2+3)") == "-5"
    assert interp.eval_text("expr 5 - -3") == "8"


def test_expr_scientific_notation(interp):
    assert interp.eval_text("expr 1e3+0.0") == "1000.0"
    assert interp.eval_text("expr 2.5e-1*4") == "1.0"


def test_expr_own_variable_substitution(interp):
    # Brace-quoted conditions reach expr untouched; expr resolves $vars itself.
    interp.eval_text("set i 2")
    assert interp.eval_text("expr {$i < 3}") == "1"


def test_expr_bracket_substitution(interp):
    interp.eval_text("proc five {} {return 5}")
    assert interp.eval_text("expr {[five] * 2}") == "10"


def test_expr_syntax_errors(interp):
    for bad in ["expr {2 +}", "expr {(1}", "expr {a b}", "expr {}"]:
        with pytest.raises((ExprSyntaxError, WrongArity)):
            interp.eval_text(bad)


def test_if_elseif_else(interp):
    script = """
    set x 7
    if {$x < 5} {set r small} elseif {$x < 10} {set r medium} else {set r large}
    set r
    """
    assert interp.eval_text(script) == "medium"


def test_while_and_break(interp):
    script = """
    set i 0
    set total 0
    while {1} {
        incr i
        if {$i > 4} {break}
        set total [expr $total+$i]
    }
    set total
    """
    assert interp.eval_text(script) == "10"


def test_for_loop(interp):
    interp.eval_text("set n 0")
    interp.eval_text("for {set i 0} {$i < 3} {incr i} {incr n 10}")
    assert interp.eval_text("set n") == "30"


def test_for_continue(interp):
    script = """
    set kept ""
    for {set i 0} {$i < 5} {incr i} {
        if {$i % 2 == 0} {continue}
        set kept "$kept $i"
    }
    set kept
    """
    assert interp.eval_text(script) == " 1 3"


def test_foreach(interp):
    interp.eval_text("set acc 0")
    interp.eval_text("foreach v {1 2 3 4} {set acc [expr $acc+$v]}")
    assert interp.eval_text("set acc") == "10"


def test_proc_call_and_return(interp):
    interp.eval_text("proc add {a b} {return [expr $a+$b]}")
    assert interp.eval_text("add 2 3") == "5"


def test_proc_locals_do_not_leak(interp):
    interp.eval_text("set a global")
    interp.eval_text("proc shadow {a} {set a inner}")
    interp.eval_text("shadow x")
    assert interp.eval_text("set a") == "global"


def test_proc_wrong_arity(interp):
    interp.eval_text("proc one {a} {return $a}")
    with pytest.raises(WrongArity):
        interp.eval_text("one 1 2")


def test_recursive_proc(interp):
    interp.eval_text(
        "proc fact {n} {if {$n <= 1} {return 1}; return [expr $n*[fact [expr $n-1]]]}")
    assert interp.eval_text("fact 10") == "3628800"


def test_recursion_depth_limit():
    interp = Interpreter(max_depth=50)
    interp.eval_text("proc loop {} {loop}")
    with pytest.raises(LimitExceeded):
        interp.eval_text("loop")


def test_evaluation_budget():
    interp = Interpreter(max_evals=1000)
    with pytest.raises(LimitExceeded):
        interp.eval_text("while {1} {set x 1}")


def test_unknown_command(interp):
    with pytest.raises(UnknownCommand) as err:
        interp.eval_text("frobnicate x")
    assert "frobnicate" in str(err.value)


def test_brace_opacity(interp):
    captured = []
    interp.registry.register_package("t", {"grab": lambda i, a: captured.extend(a) or ""})
    text = 'a $x [y]\n  "z" ; w'
    interp.eval_text("t grab {%s}" % text)
    assert captured == [text]


def test_result_is_last_command(interp):
    assert interp.eval_text("set a 1\nset b 2") == "2"


def test_nested_substitution_order(interp):
    # Innermost-first, left-to-right.
    interp.eval_text("set log {}")
    interp.registry.register_package("t", {
        "mark": lambda i, a: (i.set_var("log", i.get_var("log") + a[0]), a[0])[1],
    })
    interp.eval_text("puts [t mark a][t mark [t mark b]c]")
    assert interp.eval_text("set log") == "abbc"


def test_cancellation_between_commands(interp):
    from pnet.errors import SimCancelled
    count = [0]

    def cancel():
        count[0] += 1
        return count[0] > 10

    interp.should_cancel = cancel
    with pytest.raises(SimCancelled):
        interp.eval_text("while {1} {set x 1}")


def test_determinism(interp):
    script = """
    proc tri {n} {
        set t 0
        for {set i 1} {$i <= $n} {incr i} {set t [expr $t+$i]}
        return $t
    }
    set out {}
    foreach n {3 5 7} {set out "$out [tri $n]"}
    set out
    """
    a = Interpreter().eval_text(script)
    b = Interpreter().eval_text(script)
    assert a == b == " 6 15 28"


# -- registry ----------------------------------------------------------------

def test_register_thirteen_packages(interp):
    for i in range(13):
        interp.registry.register_package(f"pkg{i}", {"noop": lambda i, a: ""})
    assert len(interp.registry.packages) == 13


def test_duplicate_package(interp):
    interp.registry.register_package("p", {})
    with pytest.raises(DuplicatePackage):
        interp.registry.register_package("p", {})


def test_bare_resolution_unique(interp):
    interp.registry.register_package("alpha", {"hello": lambda i, a: "hi"})
    assert interp.eval_text("hello") == "hi"
    assert interp.eval_text("alpha hello") == "hi"


def test_bare_resolution_ambiguous(interp):
    interp.registry.register_package("a", {"create": lambda i, a: "a"})
    interp.registry.register_package("b", {"create": lambda i, a: "b"})
    with pytest.raises(AmbiguousCommand):
        interp.eval_text("create")
    assert interp.eval_text("a create") == "a"
    assert interp.eval_text("b create") == "b"


def test_package_unknown_command(interp):
    interp.registry.register_package("p", {"x": lambda i, a: ""})
    with pytest.raises(UnknownCommand):
        interp.eval_text("p nothere")
