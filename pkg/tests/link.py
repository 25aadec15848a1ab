# tests/link.py: waveform timing and link budget

import math
import unittest

import mlacrb as mla


class CpiTests(unittest.TestCase):
    def test_Defaults(self):
        cpi = mla.CpiConfig()
        self.assertEqual(cpi.carrier_freq, 28e9)
        self.assertEqual(cpi.num_symbols, 200)
        self.assertAlmostEqual(cpi.wavelength, 299792458.0 / 28e9, places=15)
        self.assertAlmostEqual(cpi.duration, 2e-3, places=15)
        self.assertEqual(list(cpi.time_indices()[[0, -1]]), [1, 200])

    def test_Invalid(self):
        for kwargs in ({"carrier_freq": 0.0}, {"symbol_duration": -1e-5},
                       {"num_symbols": 0}, {"num_symbols": 2.5},
                       {"num_symbols": True}):
            with self.assertRaises(mla.DomainError):
                mla.CpiConfig(**kwargs)

    def test_TimeFactor(self):
        self.assertEqual(mla.time_factor(200), 5373400)
        self.assertEqual(mla.time_factor(1), 2)
        n = 37
        self.assertEqual(mla.time_factor(n), 2 * sum(i * i for i in range(1, n + 1)))


class BudgetTests(unittest.TestCase):
    def setUp(self):
        self.cpi = mla.CpiConfig()
        self.budget = mla.LinkBudget()

    def test_Defaults(self):
        self.assertAlmostEqual(self.budget.transmit_power, 1e-4, places=18)
        self.assertEqual(self.budget.rx_gain, self.budget.tx_gain)
        self.assertAlmostEqual(mla.watts_to_dbm(mla.noise_variance(self.budget)),
                               -174.0 + 50.0, places=9)

    def test_RxGainFollowsTx(self):
        budget = mla.LinkBudget(tx_gain=4.0)
        self.assertEqual(budget.rx_gain, 4.0)
        budget = mla.LinkBudget(tx_gain=4.0, rx_gain=2.0)
        self.assertEqual(budget.rx_gain, 2.0)

    def test_RangeLaw(self):
        near = mla.reflection_power(self.budget, self.cpi, 10.0)
        far = mla.reflection_power(self.budget, self.cpi, 20.0)
        self.assertAlmostEqual(near / far, 16.0, places=10)

    def test_RadarEquation(self):
        b = self.budget
        expected = (b.transmit_power * b.tx_gain * b.rx_gain * self.cpi.wavelength ** 2
                    * b.rcs / ((4 * math.pi) ** 3 * 10.0 ** 4))
        self.assertAlmostEqual(mla.reflection_power(b, self.cpi, 10.0) / expected,
                               1.0, places=12)

    def test_UnitPathloss(self):
        budget = mla.LinkBudget(unit_pathloss=True)
        self.assertEqual(mla.reflection_power(budget, self.cpi, 3.0), 1.0)
        self.assertEqual(mla.reflection_power(budget, self.cpi, 300.0), 1.0)

    def test_Gamma(self):
        gamma = mla.snr_gamma(self.budget, self.cpi, 10.0)
        beta2 = mla.reflection_power(self.budget, self.cpi, 10.0)
        expected = (self.cpi.wavenumber ** 2 * beta2 * 5373400 * 1e-10
                    / mla.noise_variance(self.budget))
        self.assertAlmostEqual(gamma / expected, 1.0, places=12)
        # -10 dBm at 10 m is the operating point of the MSE experiments
        self.assertTrue(1.3 < gamma < 1.4, gamma)

    def test_GammaScalesWithPower(self):
        low = mla.snr_gamma(self.budget, self.cpi, 10.0)
        high = mla.snr_gamma(self.budget.with_power(mla.dbm_to_watts(0.0)),
                             self.cpi, 10.0)
        self.assertAlmostEqual(high / low, 10.0, places=9)

    def test_NoiseFree(self):
        budget = mla.LinkBudget(noise_density=0.0)
        self.assertEqual(mla.snr_gamma(budget, self.cpi, 10.0), math.inf)

    def test_Invalid(self):
        for kwargs in ({"transmit_power": 0.0}, {"rcs": -1.0}, {"bandwidth": 0.0},
                       {"noise_density": -1e-20}, {"tx_gain": 0.0}):
            with self.assertRaises(mla.DomainError):
                mla.LinkBudget(**kwargs)
        with self.assertRaises(mla.DomainError):
            mla.reflection_power(self.budget, self.cpi, 0.0)


def suite():
    loader = unittest.TestLoader()
    tests = [loader.loadTestsFromTestCase(t) for t in (
        CpiTests,
        BudgetTests)]
    return unittest.TestSuite(tests)

def test():
    runner = unittest.TextTestRunner()
    runner.run(suite())

if __name__ == "__main__":
    test()
