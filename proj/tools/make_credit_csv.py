#!/usr/bin/env python3
# Copyright 2026 The dpleak Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled synthetic credit dataset.

998 log-normal credit amounts in [250, 15000] plus two planted top records,
15945 and 18424, at seeded positions. Rerunning reproduces data/credit.csv.
"""

import math
import random
import sys

ROWS = 1000
PLANTED = (15945, 18424)


def main(path):
    rng = random.Random(20260101)
    values = []
    while len(values) < ROWS - len(PLANTED):
        v = int(round(rng.lognormvariate(math.log(2300.0), 0.75)))
        if 250 <= v <= 15000:
            values.append(v)
    for v in PLANTED:
        values.insert(rng.randrange(len(values) + 1), v)
    with open(path, "w", encoding="utf-8") as out:
        out.write("credits\n")
        for v in values:
            out.write(f"{v}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/credit.csv")
