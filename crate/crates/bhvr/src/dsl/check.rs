//! Name resolution and type checking.
//!
//! Definitions are call-by-name templates: a call is checked by binding
//! each parameter to the caller's argument expression and checking the
//! body in that environment, so parameters may stand for values or for
//! whole behaviors. Recursion among definitions is rejected up front.

use std::collections::BTreeSet;
use std::rc::Rc;

use super::ast::{Diag, Expr, ExprKind, Literal, Program, Ty};
use super::library::Library;

#[derive(Clone)]
enum TyBinding {
    Value(Ty),
    Syntactic(Rc<Expr>, TyEnv),
}

#[derive(Clone, Default)]
struct TyEnv(Option<Rc<(String, TyBinding, TyEnv)>>);

impl TyEnv {
    fn lookup(&self, name: &str) -> Option<&TyBinding> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == name {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }

    fn with(&self, name: &str, binding: TyBinding) -> TyEnv {
        TyEnv(Some(Rc::new((name.to_string(), binding, self.clone()))))
    }
}

/// Check a whole program against a library: every name resolves, the
/// definition graph is acyclic, and the entry definition (which must take
/// no parameters) type-checks. Returns the entry's result type.
pub fn check_program(program: &Program, lib: &Library, entry: &str) -> Result<Ty, Diag> {
    resolve_names(program, lib)?;
    check_def_cycles(program)?;
    let Some(def) = program.def(entry) else {
        return Err(Diag::new(
            Default::default(),
            format!("no entry definition `{entry}`"),
        ));
    };
    if !def.params.is_empty() {
        return Err(Diag::new(
            def.span,
            format!("entry definition `{entry}` must not take parameters"),
        ));
    }
    let checker = Checker { program, lib };
    checker.check(&def.body, &TyEnv::default())
}

// ------------------------------------------------------------ resolution

fn resolve_names(program: &Program, lib: &Library) -> Result<(), Diag> {
    for def in &program.defs {
        let scope: BTreeSet<String> = def.params.iter().cloned().collect();
        resolve_expr(&def.body, &scope, program, lib)?;
    }
    Ok(())
}

fn resolve_expr(
    e: &Expr,
    scope: &BTreeSet<String>,
    program: &Program,
    lib: &Library,
) -> Result<(), Diag> {
    match &e.kind {
        ExprKind::Var(name) => {
            if scope.contains(name)
                || program.def(name).is_some()
                || lib.actions.contains_key(name)
                || lib.constants.contains_key(name)
            {
                Ok(())
            } else {
                Err(Diag::new(e.span, format!("unbound name `{name}`")))
            }
        }
        ExprKind::Call { name, args } => {
            let arity = if let Some(def) = program.def(name) {
                def.params.len()
            } else if let Some(entry) = lib.actions.get(name) {
                entry.params.len()
            } else if scope.contains(name) {
                return Err(Diag::new(
                    e.span,
                    format!("`{name}` is a variable here and cannot be applied"),
                ));
            } else {
                return Err(Diag::new(e.span, format!("unbound name `{name}`")));
            };
            if args.len() != arity {
                return Err(Diag::new(
                    e.span,
                    format!("`{name}` takes {arity} argument(s), found {}", args.len()),
                ));
            }
            for a in args {
                resolve_expr(a, scope, program, lib)?;
            }
            Ok(())
        }
        ExprKind::FallbackOver { list, func } => {
            resolve_expr(list, scope, program, lib)?;
            let ok = program.def(func).map(|d| d.params.len() == 1).unwrap_or(false)
                || lib.actions.get(func).map(|a| a.params.len() == 1).unwrap_or(false);
            if ok {
                Ok(())
            } else {
                Err(Diag::new(
                    e.span,
                    format!("`{func}` must name a one-parameter definition or action"),
                ))
            }
        }
        ExprKind::Bind { var, value, body } => {
            resolve_expr(value, scope, program, lib)?;
            let mut inner = scope.clone();
            inner.insert(var.clone());
            resolve_expr(body, &inner, program, lib)
        }
        ExprKind::Seq(a, b)
        | ExprKind::Fallback(a, b)
        | ExprKind::Parallel(a, b)
        | ExprKind::Both(a, b) => {
            resolve_expr(a, scope, program, lib)?;
            resolve_expr(b, scope, program, lib)
        }
        ExprKind::RSelect { test, left, right } => {
            resolve_expr(test, scope, program, lib)?;
            resolve_expr(left, scope, program, lib)?;
            resolve_expr(right, scope, program, lib)
        }
        ExprKind::Monitor {
            test,
            recovery,
            task,
        } => {
            resolve_expr(test, scope, program, lib)?;
            resolve_expr(recovery, scope, program, lib)?;
            resolve_expr(task, scope, program, lib)
        }
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            resolve_expr(cond, scope, program, lib)?;
            resolve_expr(then_branch, scope, program, lib)?;
            resolve_expr(else_branch, scope, program, lib)
        }
        ExprKind::Attempt { body, .. } => resolve_expr(body, scope, program, lib),
        ExprKind::Cmp { arg, .. } => resolve_expr(arg, scope, program, lib),
        ExprKind::Pure(_) | ExprKind::Value(_) => Ok(()),
    }
}

fn check_def_cycles(program: &Program) -> Result<(), Diag> {
    fn callees(e: &Expr, out: &mut BTreeSet<String>) {
        match &e.kind {
            ExprKind::Var(name) => {
                out.insert(name.clone());
            }
            ExprKind::Call { name, args } => {
                out.insert(name.clone());
                for a in args {
                    callees(a, out);
                }
            }
            ExprKind::FallbackOver { list, func } => {
                out.insert(func.clone());
                callees(list, out);
            }
            ExprKind::Bind { value, body, .. } => {
                callees(value, out);
                callees(body, out);
            }
            ExprKind::Seq(a, b)
            | ExprKind::Fallback(a, b)
            | ExprKind::Parallel(a, b)
            | ExprKind::Both(a, b) => {
                callees(a, out);
                callees(b, out);
            }
            ExprKind::RSelect { test, left, right } => {
                callees(test, out);
                callees(left, out);
                callees(right, out);
            }
            ExprKind::Monitor {
                test,
                recovery,
                task,
            } => {
                callees(test, out);
                callees(recovery, out);
                callees(task, out);
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                callees(cond, out);
                callees(then_branch, out);
                callees(else_branch, out);
            }
            ExprKind::Attempt { body, .. } => callees(body, out),
            ExprKind::Cmp { arg, .. } => callees(arg, out),
            ExprKind::Pure(_) | ExprKind::Value(_) => {}
        }
    }

    fn visit(
        name: &str,
        program: &Program,
        visiting: &mut Vec<String>,
        done: &mut BTreeSet<String>,
    ) -> Result<(), Diag> {
        if done.contains(name) {
            return Ok(());
        }
        let Some(def) = program.def(name) else {
            return Ok(()); // library name
        };
        if visiting.iter().any(|n| n == name) {
            return Err(Diag::new(
                def.span,
                format!(
                    "recursive definitions are not supported: {} -> {name}",
                    visiting.join(" -> ")
                ),
            ));
        }
        visiting.push(name.to_string());
        let mut called = BTreeSet::new();
        callees(&def.body, &mut called);
        for c in called {
            visit(&c, program, visiting, done)?;
        }
        visiting.pop();
        done.insert(name.to_string());
        Ok(())
    }

    let mut done = BTreeSet::new();
    for def in &program.defs {
        visit(&def.name, program, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- typing

struct Checker<'a> {
    program: &'a Program,
    lib: &'a Library,
}

impl Checker<'_> {
    fn check(&self, e: &Expr, env: &TyEnv) -> Result<Ty, Diag> {
        match &e.kind {
            ExprKind::Var(name) => self.check_name(e, name, env),
            ExprKind::Call { name, args } => self.check_call(e, name, args, env),
            ExprKind::Seq(a, b) => {
                self.check(a, env)?;
                self.check(b, env)
            }
            ExprKind::Bind { var, value, body } => {
                let tv = self.check(value, env)?;
                self.check(body, &env.with(var, TyBinding::Value(tv)))
            }
            ExprKind::Fallback(a, b) => {
                let ta = self.check(a, env)?;
                let tb = self.check(b, env)?;
                if ta != tb {
                    return Err(Diag::new(
                        e.span,
                        format!("fallback alternatives must share a type: {ta} vs {tb}"),
                    ));
                }
                Ok(ta)
            }
            ExprKind::Parallel(a, b) | ExprKind::Both(a, b) => {
                self.check(a, env)?;
                self.check(b, env)?;
                Ok(Ty::Null)
            }
            ExprKind::RSelect { test, left, right } => {
                self.expect_ty(test, env, Ty::Bool, "rSelect test")?;
                let tl = self.check(left, env)?;
                let tr = self.check(right, env)?;
                if tl != tr {
                    return Err(Diag::new(
                        e.span,
                        format!("rSelect branches must share a type: {tl} vs {tr}"),
                    ));
                }
                Ok(tl)
            }
            ExprKind::Monitor {
                test,
                recovery,
                task,
            } => {
                self.expect_ty(test, env, Ty::Bool, "monitor test")?;
                self.expect_ty(recovery, env, Ty::Null, "monitor recovery")?;
                self.check(task, env)
            }
            ExprKind::Attempt { body, .. } => self.check(body, env),
            ExprKind::FallbackOver { list, func } => {
                let tl = self.check(list, env)?;
                let Ty::List(elem) = tl else {
                    return Err(Diag::new(
                        list.span,
                        format!("fallbackOver needs a list, found {tl}"),
                    ));
                };
                self.check_applied(e, func, (*elem).clone())
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expect_ty(cond, env, Ty::Bool, "if condition")?;
                let tt = self.check(then_branch, env)?;
                let te = self.check(else_branch, env)?;
                if tt != te {
                    return Err(Diag::new(
                        e.span,
                        format!("if branches must share a type: {tt} vs {te}"),
                    ));
                }
                Ok(tt)
            }
            ExprKind::Pure(lit) => Ok(match lit {
                Literal::Unit => Ty::Null,
                Literal::Bool(_) => Ty::Bool,
                Literal::Int(_) => Ty::Int,
            }),
            ExprKind::Cmp { arg, .. } => {
                self.expect_ty(arg, env, Ty::Int, "cmp argument")?;
                Ok(Ty::Bool)
            }
            ExprKind::Value(v) => Ok(Library::constant_ty(v)),
        }
    }

    fn expect_ty(&self, e: &Expr, env: &TyEnv, want: Ty, what: &str) -> Result<(), Diag> {
        let got = self.check(e, env)?;
        if got != want {
            return Err(Diag::new(
                e.span,
                format!("{what} must have type {want}, found {got}"),
            ));
        }
        Ok(())
    }

    fn check_name(&self, e: &Expr, name: &str, env: &TyEnv) -> Result<Ty, Diag> {
        if let Some(binding) = env.lookup(name) {
            return match binding {
                TyBinding::Value(ty) => Ok(ty.clone()),
                TyBinding::Syntactic(expr, captured) => {
                    let (expr, captured) = (expr.clone(), captured.clone());
                    self.check(&expr, &captured)
                }
            };
        }
        if let Some(def) = self.program.def(name) {
            if !def.params.is_empty() {
                return Err(Diag::new(
                    e.span,
                    format!("`{name}` takes {} argument(s)", def.params.len()),
                ));
            }
            return self.check(&def.body, &TyEnv::default());
        }
        if let Some(entry) = self.lib.actions.get(name) {
            if !entry.params.is_empty() {
                return Err(Diag::new(
                    e.span,
                    format!("`{name}` takes {} argument(s)", entry.params.len()),
                ));
            }
            return Ok(entry.ret.clone());
        }
        if let Some(v) = self.lib.constants.get(name) {
            return Ok(Library::constant_ty(v));
        }
        Err(Diag::new(e.span, format!("unbound name `{name}`")))
    }

    fn check_call(&self, e: &Expr, name: &str, args: &[Expr], env: &TyEnv) -> Result<Ty, Diag> {
        if let Some(def) = self.program.def(name) {
            let mut inner = TyEnv::default();
            for (param, arg) in def.params.iter().zip(args) {
                inner = inner.with(
                    param,
                    TyBinding::Syntactic(Rc::new(arg.clone()), env.clone()),
                );
            }
            return self.check(&def.body, &inner);
        }
        if let Some(entry) = self.lib.actions.get(name) {
            let params = entry.params.clone();
            let ret = entry.ret.clone();
            for (want, arg) in params.iter().zip(args) {
                let got = self.check_value(arg, env)?;
                if got != *want {
                    return Err(Diag::new(
                        arg.span,
                        format!("`{name}` expects a {want} here, found {got}"),
                    ));
                }
            }
            return Ok(ret);
        }
        Err(Diag::new(e.span, format!("unbound name `{name}`")))
    }

    /// Action arguments are plain values: a bound variable, a named world
    /// object, or a parameter standing for one.
    fn check_value(&self, e: &Expr, env: &TyEnv) -> Result<Ty, Diag> {
        match &e.kind {
            ExprKind::Var(name) => {
                if let Some(binding) = env.lookup(name) {
                    return match binding {
                        TyBinding::Value(ty) => Ok(ty.clone()),
                        TyBinding::Syntactic(expr, captured) => {
                            let (expr, captured) = (expr.clone(), captured.clone());
                            self.check_value(&expr, &captured)
                        }
                    };
                }
                if let Some(v) = self.lib.constants.get(name) {
                    return Ok(Library::constant_ty(v));
                }
                Err(Diag::new(
                    e.span,
                    format!("`{name}` is not a value in this position"),
                ))
            }
            ExprKind::Value(v) => Ok(Library::constant_ty(v)),
            _ => Err(Diag::new(
                e.span,
                "action arguments must be values (a bound variable or a named object)",
            )),
        }
    }

    fn check_applied(&self, site: &Expr, func: &str, elem: Ty) -> Result<Ty, Diag> {
        if let Some(def) = self.program.def(func) {
            if def.params.len() != 1 {
                return Err(Diag::new(
                    site.span,
                    format!("`{func}` must take exactly one parameter"),
                ));
            }
            let inner = TyEnv::default().with(&def.params[0], TyBinding::Value(elem));
            return self.check(&def.body, &inner);
        }
        if let Some(entry) = self.lib.actions.get(func) {
            if entry.params.len() != 1 {
                return Err(Diag::new(
                    site.span,
                    format!("`{func}` must take exactly one argument"),
                ));
            }
            if entry.params[0] != elem {
                return Err(Diag::new(
                    site.span,
                    format!(
                        "`{func}` expects a {}, but the list holds {elem}",
                        entry.params[0]
                    ),
                ));
            }
            return Ok(entry.ret.clone());
        }
        Err(Diag::new(site.span, format!("unbound name `{func}`")))
    }

}
