"""Reference values for complex modified Bessel functions (mpmath, 30 digits)."""
import mpmath as mp

mp.mp.dps = 30
cases = [
    (0.0, mp.mpc(1, 0)),
    (0.0, mp.mpc(0.3, 0.7)),
    (0.0, mp.mpc(1e-6, 2e-6)),
    (0.75, mp.mpc(0.5, -1.2)),
    (0.75, mp.mpc(3.0, 4.0)),
    (1.0, mp.mpc(0.1, 1.9)),
    (2.0, mp.mpc(25.0, -10.0)),
    (3.0, mp.mpc(0.2, 0.05)),
    (1.5, mp.mpc(7.0, 30.0)),
    (0.25, mp.mpc(40.0, 0.0)),
]
for nu, w in cases:
    i = mp.besseli(nu, w)
    k = mp.besselk(nu, w)
    print("{%r, {%s, %s}, {%s, %s}, {%s, %s}}," % (
        nu, mp.nstr(w.real, 17), mp.nstr(w.imag, 17),
        mp.nstr(i.real, 17), mp.nstr(i.imag, 17),
        mp.nstr(k.real, 17), mp.nstr(k.imag, 17)))
