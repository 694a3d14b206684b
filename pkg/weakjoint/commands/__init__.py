from weakjoint.commands import approx, assign, infer_xp, infer_xp4, kernel, nogo, selftest, weyl

COMMANDS = (infer_xp, infer_xp4, nogo, approx, assign, weyl, kernel, selftest)

__all__ = ["COMMANDS"]
