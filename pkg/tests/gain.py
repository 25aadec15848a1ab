# tests/gain.py: array gain under velocity mismatch

import math
import unittest

import numpy as np

import mlacrb as mla


class DirichletTests(unittest.TestCase):
    def test_Limits(self):
        self.assertEqual(mla.dirichlet_ratio(0.0, 5), 5.0)
        self.assertEqual(mla.dirichlet_ratio(2 * math.pi, 4), -4.0)
        self.assertEqual(mla.dirichlet_ratio(2 * math.pi, 3), 3.0)
        self.assertEqual(mla.dirichlet_ratio(-4 * math.pi, 4), 4.0)

    def test_Values(self):
        x = np.array([0.1, 1.0, 2.5])
        expected = np.sin(7 * x / 2) / np.sin(x / 2)
        np.testing.assert_allclose(mla.dirichlet_ratio(x, 7), expected, rtol=1e-14)

    def test_MatchesSum(self):
        count = 6
        ms = np.arange(count) - (count - 1) / 2
        for x in (0.013, 0.7, 3.0):
            direct = np.sum(np.exp(-1j * ms * x))
            self.assertAlmostEqual(direct.real, mla.dirichlet_ratio(x, count), places=12)
            self.assertAlmostEqual(direct.imag, 0.0, places=12)

    def test_ScalarType(self):
        self.assertIsInstance(mla.dirichlet_ratio(0.5, 3), float)
        self.assertEqual(mla.dirichlet_ratio(np.zeros(4), 3).shape, (4,))


class PsiTests(unittest.TestCase):
    def setUp(self):
        self.geom = mla.ArrayGeometry(120, 2, 61, mla.CpiConfig().wavelength)
        self.cpi = mla.CpiConfig()
        self.target = mla.TargetState(10.0)

    def test_NoMismatch(self):
        zero = mla.MismatchSpec()
        for exact in (True, False):
            self.assertEqual(mla.worst_gain_over_cpi(self.geom, self.target, self.cpi,
                                                     zero, use_exact=exact), 1.0)
        psi = mla.psi_exact(self.geom, self.target, self.cpi, zero)
        np.testing.assert_allclose(psi, math.sqrt(240), rtol=1e-14)

    def test_DirichletIsFirstOrderSum(self):
        for theta in (math.pi / 2, 1.0):
            target = mla.TargetState(10.0, theta)
            mismatch = mla.MismatchSpec(3.0, 25.0)
            summed = mla.psi_first_order_sum(self.geom, target, self.cpi, mismatch)
            closed = mla.psi_dirichlet(self.geom, target, self.cpi, mismatch)
            self.assertLessEqual(np.linalg.norm(closed - summed),
                                 1e-12 * np.linalg.norm(summed))

    def test_Bounded(self):
        psi = mla.psi_exact(self.geom, self.target, self.cpi, mla.MismatchSpec(7.0, -12.0))
        self.assertTrue(np.all(np.abs(psi) <= math.sqrt(240) * (1 + 1e-12)))
        self.assertEqual(psi.shape, (200,))

    def test_ScalarIndex(self):
        mismatch = mla.MismatchSpec(1.0, 2.0)
        value = mla.psi_exact(self.geom, self.target, self.cpi, mismatch, n=17)
        self.assertIsInstance(value, complex)
        full = mla.psi_exact(self.geom, self.target, self.cpi, mismatch)
        self.assertAlmostEqual(value, full[16], places=12)
        self.assertIsInstance(
            mla.psi_dirichlet(self.geom, self.target, self.cpi, mismatch, n=3), complex)

    def test_RadialMismatchIsPhase(self):
        # in the Dirichlet form a radial error only rotates the combined signal
        psi = mla.psi_dirichlet(self.geom, self.target, self.cpi, mla.MismatchSpec(20.0))
        np.testing.assert_allclose(np.abs(psi), math.sqrt(240), rtol=1e-12)

    def test_BadIndex(self):
        with self.assertRaises(mla.DomainError):
            mla.psi_exact(self.geom, self.target, self.cpi, mla.MismatchSpec(), n=0)
        with self.assertRaises(mla.DomainError):
            mla.psi_dirichlet(self.geom, self.target, self.cpi, mla.MismatchSpec(),
                              n=[1, 201])


class GridTests(unittest.TestCase):
    def setUp(self):
        self.geom = mla.ArrayGeometry(120, 2, 61, mla.CpiConfig().wavelength)
        self.cpi = mla.CpiConfig()

    def test_DirichletTracksExact(self):
        target = mla.TargetState(self.geom.fresnel_distance)
        axis = np.linspace(-40.0, 40.0, 41)
        exact = mla.gain_grid(self.geom, target, self.cpi, axis, axis)
        approx = mla.gain_grid(self.geom, target, self.cpi, axis, axis, use_exact=False)
        self.assertEqual(exact.shape, (41, 41))
        self.assertEqual(exact[20, 20], 1.0)
        # cells above -20 dB
        keep = exact > 0.01
        self.assertGreater(int(np.count_nonzero(keep)), 41)
        diff = np.abs(mla.linear_to_db(exact[keep]) - mla.linear_to_db(approx[keep]))
        self.assertLessEqual(float(np.max(diff)), 0.5)

    def test_ThreadsDoNotMatter(self):
        target = mla.TargetState(12.0, 1.2)
        dvr = np.linspace(-10.0, 10.0, 5)
        dvt = np.linspace(-30.0, 30.0, 4)
        serial = mla.gain_grid(self.geom, target, self.cpi, dvr, dvt, threads=1)
        pooled = mla.gain_grid(self.geom, target, self.cpi, dvr, dvt, threads=3)
        self.assertTrue(np.array_equal(serial, pooled))
        self.assertEqual(serial.shape, (5, 4))

    def test_TransverseLoss(self):
        target = mla.TargetState(10.0)
        gains = mla.gain_grid(self.geom, target, self.cpi, [0.0], [0.0, 10.0, 40.0])[0]
        self.assertEqual(gains[0], 1.0)
        self.assertLess(gains[2], gains[1])
        self.assertLess(gains[1], 1.0)


def suite():
    loader = unittest.TestLoader()
    tests = [loader.loadTestsFromTestCase(t) for t in (
        DirichletTests,
        PsiTests,
        GridTests)]
    return unittest.TestSuite(tests)

def test():
    runner = unittest.TextTestRunner()
    runner.run(suite())

if __name__ == "__main__":
    test()
