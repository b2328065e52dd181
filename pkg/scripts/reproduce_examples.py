"""Print the worked examples on the two small one-agent systems."""
import os

from epimu.distinction import a_distinction, is_a_distinguished
from epimu.finitary import compute_gamma, ka_f, pa_f
from epimu.mas import load_mas
from epimu.oracle import check_epistemic_diagram

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")


def main():
    fig1 = load_mas(os.path.join(MODELS, "fig1.mas"))
    g = compute_gamma(fig1, "a")
    print("three-state system")
    print("  Gamma_a:", {q: sorted(rs) for q, rs in g.image.items()})
    print("  K_a({1,3}) =", sorted(ka_f(g, {1, 3})), " P_a({2}) =", sorted(pa_f(g, {2})))
    print("  distinguished:", is_a_distinguished(fig1, "a"))
    rep = check_epistemic_diagram(fig1, "a", {1, 3}, 4)
    print("  tree vs states, S={1,3}, depth 4:", rep.to_json()["k_mismatches"])
    d = a_distinction(fig1, "a")
    print(f"  a-distinction: {d.mas.n} states, distinguished: {is_a_distinguished(d.mas, 'a')}")
    for line in d.map_lines():
        print("   ", line)

    fig2 = load_mas(os.path.join(MODELS, "fig2a.mas"))
    g2 = compute_gamma(fig2, "a")
    print("state 3 split in two")
    print("  K_a({1,4}) =", sorted(ka_f(g2, {1, 4})))
    for depth in (5, 6, 7):
        rep = check_epistemic_diagram(fig2, "a", {1, 4}, depth)
        print(f"  depth {depth} mismatches:", rep.to_json()["k_mismatches"])


if __name__ == "__main__":
    main()
