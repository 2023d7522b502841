"""Random well-formed scripts over a fixed pair of inputs, for fuzzing."""
import random

MATRIX_EXPRS = [
    "t(X) %*% X", "t(X) %*% y", "X + 1", "X * 2", "t(t(X))", "diag(matrix(1, ncol(X), 1))",
    "append(X, y)", "X - X", "matrix(0.5, nrow(X), 3)", "t(y) %*% X",
]


def random_script(rng: random.Random) -> str:
    """A script reading X and y, mixing straight-line code, ifs and loops."""
    lines = []
    with_fn = rng.random() < 0.3
    if with_fn:
        lines.append("gram = function(matrix[double] A) return (matrix[double] B) {")
        lines.append("  B = t(A) %*% A;")
        lines.append("}")
    lines += ["X = read($1);", "y = read($2);"]
    names = []
    if with_fn:
        lines.append("G = gram(X);")
        names.append("G")
    for _ in range(rng.randint(1, 6)):
        kind = rng.random()
        target = f"V{len(names)}"
        expr = rng.choice(MATRIX_EXPRS)
        if kind < 0.55 or not names:
            lines.append(f"{target} = {expr};")
        elif kind < 0.7:
            lines.append(f"if (sum(y) > {rng.randint(0, 5)}) {{ {target} = {expr}; }} "
                         f"else {{ {target} = {expr}; }}")
        elif kind < 0.85:
            n = rng.randint(1, 4)
            lines.append(f"{target} = {expr};")
            lines.append(f"for (i in 1:{n}) {{ {target} = {target} + 1; }}")
        else:
            lines.append(f"{target} = {expr};")
            lines.append(f"k = 0; while (k < 3) {{ {target} = {target} * 2; k = k + 1; }}")
        names.append(target)
    for i, n in enumerate(rng.sample(names, k=min(len(names), 2))):
        lines.append(f'write({n}, "out{i}");')
    return "\n".join(lines) + "\n"
