//! Random expression trees rendered with minimal parentheses, checked
//! against an independent evaluator.

use hausdorff::model::Expr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
enum Node {
    Num(f64, String),
    U(usize),
    T,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(&'static str, Vec<Node>),
    Chi(f64, f64, Box<Node>),
}

// binding strength: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom
fn prec(n: &Node) -> u8 {
    match n {
        Node::Bin('+' | '-', ..) => 1,
        Node::Bin('*' | '/', ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin('^', ..) => 4,
        _ => 5,
    }
}

fn wrap(n: &Node, parens: bool, rng: &mut ChaCha8Rng) -> String {
    let s = render(n, rng);
    if parens || rng.gen_bool(0.05) {
        format!("({s})")
    } else {
        s
    }
}

fn render(n: &Node, rng: &mut ChaCha8Rng) -> String {
    let sp = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.3) { " " } else { "" };
    match n {
        Node::Num(_, text) => text.clone(),
        Node::U(0) => "u".into(),
        Node::U(k) => format!("u{k}"),
        Node::T => "t1".into(),
        Node::Neg(a) => format!("-{}", wrap(a, prec(a) < 3, rng)),
        Node::Bin(op, a, b) => {
            let (lp, rp) = match op {
                '+' | '-' => (prec(a) < 1, prec(b) <= 1),
                '*' | '/' => (prec(a) < 2, prec(b) <= 2),
                _ => (prec(a) < 5, prec(b) < 3),
            };
            let (l, r) = (wrap(a, lp, rng), wrap(b, rp, rng));
            format!("{l}{}{op}{}{r}", sp(rng), sp(rng))
        }
        Node::Call(name, args) => {
            let parts: Vec<String> = args.iter().map(|a| render(a, rng)).collect();
            format!("{name}({})", parts.join(", "))
        }
        Node::Chi(lo, hi, a) => format!("chi({lo}, {hi})({})", render(a, rng)),
    }
}

fn eval(n: &Node, u: &[f64], t: f64) -> f64 {
    match n {
        Node::Num(x, _) => *x,
        Node::U(k) => u[k.saturating_sub(1)],
        Node::T => t,
        Node::Neg(a) => -eval(a, u, t),
        Node::Bin(op, a, b) => {
            let x = eval(a, u, t);
            let y = eval(b, u, t);
            match op {
                // multiplication by zero annihilates, including inf and NaN
                '*' if x == 0.0 || y == 0.0 => 0.0,
                '*' => x * y,
                '+' => x + y,
                '-' => x - y,
                '/' => x / y,
                _ => x.powf(y),
            }
        }
        Node::Call(name, args) => {
            let v: Vec<f64> = args.iter().map(|a| eval(a, u, t)).collect();
            match *name {
                "exp" => v[0].exp(),
                "log" => v[0].ln(),
                "abs" => v[0].abs(),
                "sqrt" => v[0].sqrt(),
                "max" => v[1..].iter().fold(v[0], |m, x| m.max(*x)),
                _ => v[1..].iter().fold(v[0], |m, x| m.min(*x)),
            }
        }
        Node::Chi(lo, hi, a) => {
            let x = eval(a, u, t);
            f64::from(u8::from(x > *lo && x < *hi))
        }
    }
}

fn number(rng: &mut ChaCha8Rng) -> Node {
    match rng.gen_range(0..3) {
        0 => {
            let k = rng.gen_range(0..10);
            Node::Num(f64::from(k), k.to_string())
        }
        1 => {
            let x = f64::from(rng.gen_range(0..1000)) / 100.0;
            Node::Num(x, format!("{x}"))
        }
        _ => {
            let m = rng.gen_range(1..10);
            let e = rng.gen_range(-2..3);
            Node::Num(format!("{m}e{e}").parse().unwrap(), format!("{m}e{e}"))
        }
    }
}

fn tree(rng: &mut ChaCha8Rng, depth: u32) -> Node {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 | 1 => number(rng),
            2 => Node::U(rng.gen_range(0..3)),
            _ => Node::T,
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(tree(rng, depth - 1));
    match rng.gen_range(0..10) {
        0 => Node::Neg(sub(rng)),
        1..=5 => {
            let op = ['+', '-', '*', '/', '^'][rng.gen_range(0..5)];
            let (a, b) = (sub(rng), sub(rng));
            Node::Bin(op, a, b)
        }
        6 | 7 => {
            let name = ["exp", "log", "abs", "sqrt"][rng.gen_range(0..4)];
            Node::Call(name, vec![tree(rng, depth - 1)])
        }
        8 => {
            let name = ["max", "min"][rng.gen_range(0..2)];
            let count = rng.gen_range(2..4);
            Node::Call(name, (0..count).map(|_| tree(rng, depth - 1)).collect())
        }
        _ => {
            let lo = f64::from(rng.gen_range(-4..4)) / 2.0;
            let hi = lo + f64::from(rng.gen_range(1..5)) / 2.0;
            Node::Chi(lo, hi, sub(rng))
        }
    }
}

#[test]
fn thousand_random_trees_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let node = tree(&mut rng, 5);
        let text = render(&node, &mut rng);
        let parsed = Expr::parse(&text).unwrap_or_else(|e| panic!("case {case}: {text}: {e}"));
        for _ in 0..3 {
            let u = [rng.gen_range(0.05..4.0), rng.gen_range(0.05..4.0)];
            let t = rng.gen_range(-3.0..3.0);
            let want = eval(&node, &u, t);
            let got = parsed.eval(&u, &[t]);
            assert!(
                want == got || (want.is_nan() && got.is_nan()),
                "case {case}: {text} at u = {u:?}, t = {t}: expected {want}, got {got}"
            );
        }
    }
}

#[test]
fn malformed_text_is_rejected() {
    for text in ["", "1 +", "(u", "u)", "exp()", "max(u)", "sqrt(u, 2)", "chi(0, u)(u)", "2 ** u", "v", "u01", "1..2"] {
        assert!(Expr::parse(text).is_err(), "{text:?} parsed");
    }
}
