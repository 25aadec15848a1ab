# tests/nearfield.py: element ranges, projections and array response

import math
import unittest

import numpy as np

import mlacrb as mla

LAMBDA = mla.CpiConfig().wavelength


class RangeTests(unittest.TestCase):
    def setUp(self):
        self.geom = mla.ArrayGeometry(120, 2, 61, LAMBDA)

    def test_Origin(self):
        geom = mla.ArrayGeometry(5, 3, 2, LAMBDA)
        target = mla.TargetState(7.5, 0.8)
        self.assertEqual(mla.element_range(geom, target, 0, 0), 7.5)

    def test_Broadside(self):
        target = mla.TargetState(12.0, math.pi / 2)
        x = mla.element_position(self.geom, -20.5, 0.5)
        self.assertAlmostEqual(mla.element_range(self.geom, target, -20.5, 0.5),
                               math.sqrt(12.0 ** 2 + x * x), places=13)

    def test_EdgeElementAtFresnel(self):
        target = mla.TargetState(9.79, math.pi / 2)
        self.assertAlmostEqual(mla.element_range(self.geom, target, 59.5, 0.5),
                               9.8227, places=3)

    def test_VectorForm(self):
        target = mla.TargetState(15.0, 1.1)
        ranges = mla.element_ranges(self.geom, target)
        pairs = mla.index_set(self.geom)
        for i in (0, 17, 119, 120, 239):
            self.assertAlmostEqual(ranges[i],
                                   mla.element_range(self.geom, target, *pairs[i]),
                                   places=12)

    def test_RangeOffsets(self):
        target = mla.TargetState(15.0, 2.0)
        np.testing.assert_allclose(mla.range_offsets(self.geom, target),
                                   mla.element_ranges(self.geom, target) - 15.0,
                                   rtol=0, atol=1e-12)


class ProjectionTests(unittest.TestCase):
    def setUp(self):
        self.geom = mla.ArrayGeometry(120, 2, 61, LAMBDA)

    def test_UnitNorm(self):
        for r in (9.79, 20.0, 200.0):
            for theta in (0.3, math.pi / 2, 2.5):
                q, p = mla.projections(self.geom, mla.TargetState(r, theta))
                np.testing.assert_allclose(q * q + p * p, 1.0, rtol=0, atol=1e-14)

    def test_OriginIsRadial(self):
        geom = mla.ArrayGeometry(3, 1, 1, LAMBDA)
        self.assertEqual(mla.projection_coeffs(geom, mla.TargetState(4.0, 1.0), 0, 0),
                         (1.0, 0.0))

    def test_BroadsideSymmetry(self):
        q, p = mla.projections(self.geom, mla.TargetState(11.0, math.pi / 2))
        np.testing.assert_allclose(q[::-1], q, rtol=0, atol=1e-15)
        np.testing.assert_allclose(p[::-1], -p, rtol=0, atol=1e-15)

    def test_BroadsideValues(self):
        target = mla.TargetState(11.0, math.pi / 2)
        q, p = mla.projection_coeffs(self.geom, target, 10.5, -0.5)
        r_mk = mla.element_range(self.geom, target, 10.5, -0.5)
        x = mla.element_position(self.geom, 10.5, -0.5)
        self.assertAlmostEqual(q, 11.0 / r_mk, places=15)
        self.assertAlmostEqual(p, x / r_mk, places=15)

    def test_FarField(self):
        q, p = mla.far_field_projections(self.geom)
        self.assertTrue(np.all(q == 1.0))
        self.assertTrue(np.all(p == 0.0))
        self.assertEqual(q.shape, (240,))


class ResponseTests(unittest.TestCase):
    def setUp(self):
        self.geom = mla.ArrayGeometry(120, 2, 61, LAMBDA)
        self.cpi = mla.CpiConfig()

    def test_UnitModulus(self):
        target = mla.TargetState(20.0, 1.2, 10.0, 8.0)
        a = mla.response_matrix(self.geom, target, self.cpi)
        self.assertEqual(a.shape, (200, 240))
        np.testing.assert_allclose(np.abs(a), 1.0, rtol=0, atol=1e-14)

    def test_StaticTarget(self):
        target = mla.TargetState(20.0, 1.2)
        first = mla.array_response(self.geom, target, self.cpi, 1)
        later = mla.array_response(self.geom, target, self.cpi, 150)
        self.assertTrue(np.array_equal(first, later))

    def test_PhaseLaw(self):
        target = mla.TargetState(20.0, math.pi / 2, 10.0, 8.0)
        a1 = mla.array_response(self.geom, target, self.cpi, 1)
        a2 = mla.array_response(self.geom, target, self.cpi, 2)
        q, p = mla.projections(self.geom, target)
        v = q * 10.0 + p * 8.0
        expected = np.exp(-1j * self.cpi.wavenumber * v * self.cpi.symbol_duration)
        np.testing.assert_allclose(a2 * np.conj(a1), expected, rtol=0, atol=1e-9)

    def test_MatchesDefinition(self):
        target = mla.TargetState(14.0, 0.9, -3.0, 5.0)
        n = 37
        q, p = mla.projections(self.geom, target)
        path = (mla.element_ranges(self.geom, target)
                + (q * -3.0 + p * 5.0) * n * self.cpi.symbol_duration)
        expected = np.exp(-1j * self.cpi.wavenumber * path)
        np.testing.assert_allclose(mla.array_response(self.geom, target, self.cpi, n),
                                   expected, rtol=0, atol=1e-9)

    def test_TimeIndexRange(self):
        target = mla.TargetState(20.0)
        for n in (0, 201):
            with self.assertRaises(mla.DomainError):
                mla.array_response(self.geom, target, self.cpi, n)


class TargetStateTests(unittest.TestCase):
    def test_Defaults(self):
        target = mla.TargetState(10.0)
        self.assertEqual(target.angle, math.pi / 2)
        self.assertEqual(target.velocity, (0.0, 0.0))

    def test_WithVelocity(self):
        target = mla.TargetState(10.0).with_velocity(10.0, 8.0)
        self.assertEqual(target.velocity, (10.0, 8.0))
        self.assertEqual(target.range, 10.0)

    def test_Invalid(self):
        for args in ((0.0,), (-1.0,), (5.0, -0.1), (5.0, 3.2)):
            with self.assertRaises(mla.DomainError):
                mla.TargetState(*args)


def suite():
    loader = unittest.TestLoader()
    tests = [loader.loadTestsFromTestCase(t) for t in (
        RangeTests,
        ProjectionTests,
        ResponseTests,
        TargetStateTests)]
    return unittest.TestSuite(tests)

def test():
    runner = unittest.TextTestRunner()
    runner.run(suite())

if __name__ == "__main__":
    test()
