"""Build and validate the shipped mini corpus.

For every task: the reference solution must pass all basic and challenge
asserts, the error code must define the right function name, compile, and
fail at least one assert. Writes src/codemend/data/mini_corpus.jsonl and
tests/reference_solutions.py, and prints the corpus length thresholds.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

TASKS: list[dict] = [
    {
        "task_id": "remove_occ",
        "description": "Write a python function to remove the first and last occurrence of a given character from the string.",
        "solution": (
            "def remove_Occ(s, ch):\n"
            "    for _ in range(2):\n"
            "        idx = s.find(ch)\n"
            "        if idx >= 0:\n"
            "            s = s[:idx] + s[idx + 1:]\n"
            "    idx = s.rfind(ch)\n"
            "    if idx >= 0:\n"
            "        s = s[:idx] + s[idx + 1:]\n"
            "    return s\n"
        ),
        "error_code": (
            "def remove_Occ(s, ch):\n"
            "    # drop the character from both ends of the string\n"
            "    return s[1:-1]\n"
        ),
        "test_list": [
            'assert remove_Occ("hello","l") == "heo"',
            'assert remove_Occ("abcda","a") == "bcd"',
            'assert remove_Occ("PHP","P") == "H"',
        ],
        "challenge_test_list": [
            'assert remove_Occ("hellololl","l") == "heolol"',
            'assert remove_Occ("","l") == ""',
            'assert remove_Occ("","l") == ""',
        ],
    },
    {
        "task_id": "is_woodall",
        "description": "Write a function to check if the given number is woodall or not.",
        "solution": (
            "def is_woodall(number):\n"
            "    if number < 1:\n"
            "        return False\n"
            "    n = 1\n"
            "    while n * (2 ** n) - 1 <= number:\n"
            "        if n * (2 ** n) - 1 == number:\n"
            "            return True\n"
            "        n += 1\n"
            "    return False\n"
        ),
        "error_code": (
            "def is_woodall(number):\n"
            "    # woodall numbers have the form n * 2**n + 1\n"
            "    n = 1\n"
            "    while n * (2 ** n) + 1 <= number:\n"
            "        if n * (2 ** n) + 1 == number:\n"
            "            return True\n"
            "        n += 1\n"
            "    return False\n"
        ),
        "test_list": [
            "assert is_woodall(383) == True",
            "assert is_woodall(254) == False",
            "assert is_woodall(200) == False",
        ],
        "challenge_test_list": [
            "assert is_woodall(32212254719) == True",
            "assert is_woodall(32212254718) == False",
            "assert is_woodall(159) == True",
        ],
    },
    {
        "task_id": "find_max",
        "description": "Write a python function to find the largest value in a list of numbers.",
        "solution": (
            "def find_max(nums):\n"
            "    best = nums[0]\n"
            "    for n in nums[1:]:\n"
            "        if n > best:\n"
            "            best = n\n"
            "    return best\n"
        ),
        "error_code": (
            "def find_max(nums):\n"
            "    # scan the list and keep the extreme value\n"
            "    best = nums[0]\n"
            "    for n in nums[1:]:\n"
            "        if n < best:\n"
            "            best = n\n"
            "    return best\n"
        ),
        "test_list": [
            "assert find_max([3, 1, 2]) == 3",
            "assert find_max([-5, -2, -9]) == -2",
            "assert find_max([7]) == 7",
        ],
        "challenge_test_list": [
            "assert find_max([0, 0, 0]) == 0",
            "assert find_max(list(range(1000))) == 999",
            "assert find_max([-1000000, 999999]) == 999999",
        ],
    },
    {
        "task_id": "count_vowels",
        "description": "Write a python function to count the vowels in a string, ignoring case.",
        "solution": (
            "def count_vowels(s):\n"
            "    return sum(1 for ch in s if ch.lower() in 'aeiou')\n"
        ),
        "error_code": (
            "def count_vowels(s):\n"
            "    # count every vowel character in the input\n"
            "    return sum(1 for ch in s if ch in 'AEIOU')\n"
        ),
        "test_list": [
            'assert count_vowels("hello") == 2',
            'assert count_vowels("xyz") == 0',
            'assert count_vowels("aeiou") == 5',
        ],
        "challenge_test_list": [
            'assert count_vowels("HELLO") == 2',
            'assert count_vowels("") == 0',
            'assert count_vowels("Quick brown fox") == 4',
        ],
    },
    {
        "task_id": "reverse_words",
        "description": "Write a python function to reverse the order of words in a string.",
        "solution": (
            "def reverse_words(s):\n"
            "    return ' '.join(reversed(s.split()))\n"
        ),
        "error_code": (
            "def reverse_words(s):\n"
            "    # flip the sentence so the last word comes first\n"
            "    return s[::-1]\n"
        ),
        "test_list": [
            'assert reverse_words("hello world") == "world hello"',
            'assert reverse_words("a b c") == "c b a"',
            'assert reverse_words("single") == "single"',
        ],
        "challenge_test_list": [
            'assert reverse_words("  spaced  out  ") == "out spaced"',
            'assert reverse_words("x y") == "y x"',
            'assert reverse_words("one two three four") == "four three two one"',
        ],
    },
    {
        "task_id": "is_palindrome",
        "description": "Write a python function to check whether a string reads the same forwards and backwards.",
        "solution": (
            "def is_palindrome(s):\n"
            "    return s == s[::-1]\n"
        ),
        "error_code": (
            "def is_palindrome(s):\n"
            "    # a palindrome starts and ends with the same letter\n"
            "    return s[0] == s[-1]\n"
        ),
        "test_list": [
            'assert is_palindrome("aba") == True',
            'assert is_palindrome("abc") == False',
            'assert is_palindrome("") == True',
        ],
        "challenge_test_list": [
            'assert is_palindrome("abba") == True',
            'assert is_palindrome("ab") == False',
            'assert is_palindrome("a") == True',
        ],
    },
    {
        "task_id": "sum_digits",
        "description": "Write a python function to sum the decimal digits of a non-negative integer.",
        "solution": (
            "def sum_digits(n):\n"
            "    return sum(int(d) for d in str(n))\n"
        ),
        "error_code": (
            "def sum_digits(n):\n"
            "    # combine all digits of the number into one value\n"
            "    total = 1\n"
            "    for d in str(n):\n"
            "        total *= int(d)\n"
            "    return total\n"
        ),
        "test_list": [
            "assert sum_digits(123) == 6",
            "assert sum_digits(0) == 0",
            "assert sum_digits(999) == 27",
        ],
        "challenge_test_list": [
            "assert sum_digits(1000000) == 1",
            "assert sum_digits(123456789) == 45",
            "assert sum_digits(5) == 5",
        ],
    },
    {
        "task_id": "fib",
        "description": "Write a function that returns the nth Fibonacci number, with fib(0) == 0 and fib(1) == 1.",
        "solution": (
            "def fib(n):\n"
            "    a, b = 0, 1\n"
            "    for _ in range(n):\n"
            "        a, b = b, a + b\n"
            "    return a\n"
        ),
        "error_code": (
            "def fib(n):\n"
            "    # each term is the sum of the two terms before it\n"
            "    return n\n"
        ),
        "test_list": [
            "assert fib(0) == 0",
            "assert fib(1) == 1",
            "assert fib(7) == 13",
        ],
        "challenge_test_list": [
            "assert fib(10) == 55",
            "assert fib(15) == 610",
            "assert fib(2) == 1",
        ],
    },
    {
        "task_id": "is_prime",
        "description": "Write a python function to check whether an integer greater than zero is a prime number.",
        "solution": (
            "def is_prime(n):\n"
            "    if n < 2:\n"
            "        return False\n"
            "    i = 2\n"
            "    while i * i <= n:\n"
            "        if n % i == 0:\n"
            "            return False\n"
            "        i += 1\n"
            "    return True\n"
        ),
        "error_code": (
            "def is_prime(n):\n"
            "    # primes are the numbers with no even divisor\n"
            "    return n % 2 == 1\n"
        ),
        "test_list": [
            "assert is_prime(7) == True",
            "assert is_prime(8) == False",
            "assert is_prime(2) == True",
        ],
        "challenge_test_list": [
            "assert is_prime(1) == False",
            "assert is_prime(97) == True",
            "assert is_prime(7919) == True",
        ],
    },
    {
        "task_id": "gcd",
        "description": "Write a python function to compute the greatest common divisor of two non-negative integers.",
        "solution": (
            "def gcd(a, b):\n"
            "    while b:\n"
            "        a, b = b, a % b\n"
            "    return a\n"
        ),
        "error_code": (
            "def gcd(a, b):\n"
            "    # the greatest common divisor can never exceed either input\n"
            "    return min(a, b)\n"
        ),
        "test_list": [
            "assert gcd(12, 8) == 4",
            "assert gcd(7, 3) == 1",
            "assert gcd(10, 10) == 10",
        ],
        "challenge_test_list": [
            "assert gcd(0, 5) == 5",
            "assert gcd(270, 192) == 6",
            "assert gcd(17, 0) == 17",
        ],
    },
    {
        "task_id": "flatten_list",
        "description": "Write a python function to flatten a list of lists by one level.",
        "solution": (
            "def flatten_list(lst):\n"
            "    return [item for sub in lst for item in sub]\n"
        ),
        "error_code": (
            "def flatten_list(lst):\n"
            "    # merge the sublists into a single flat list\n"
            "    return lst\n"
        ),
        "test_list": [
            "assert flatten_list([[1, 2], [3]]) == [1, 2, 3]",
            "assert flatten_list([[]]) == []",
            "assert flatten_list([[1], [2], [3]]) == [1, 2, 3]",
        ],
        "challenge_test_list": [
            "assert flatten_list([]) == []",
            "assert flatten_list([[1, 2, 3]]) == [1, 2, 3]",
            "assert flatten_list([[1], [], [2]]) == [1, 2]",
        ],
    },
    {
        "task_id": "char_frequency",
        "description": "Write a python function to build a dictionary mapping each character of a string to its count.",
        "solution": (
            "def char_frequency(s):\n"
            "    freq = {}\n"
            "    for ch in s:\n"
            "        freq[ch] = freq.get(ch, 0) + 1\n"
            "    return freq\n"
        ),
        "error_code": (
            "def char_frequency(s):\n"
            "    # record how often each character shows up\n"
            "    freq = {}\n"
            "    for ch in s:\n"
            "        freq[ch] = 1\n"
            "    return freq\n"
        ),
        "test_list": [
            'assert char_frequency("aab") == {"a": 2, "b": 1}',
            'assert char_frequency("") == {}',
            'assert char_frequency("abc") == {"a": 1, "b": 1, "c": 1}',
        ],
        "challenge_test_list": [
            'assert char_frequency("aaaa") == {"a": 4}',
            'assert char_frequency("ab ba") == {"a": 2, "b": 2, " ": 1}',
            'assert char_frequency("zz z") == {"z": 3, " ": 1}',
        ],
    },
    {
        "task_id": "binary_to_decimal",
        "description": "Write a python function to convert a binary string to its decimal value.",
        "solution": (
            "def binary_to_decimal(s):\n"
            "    value = 0\n"
            "    for bit in s:\n"
            "        value = value * 2 + int(bit)\n"
            "    return value\n"
        ),
        "error_code": (
            "def binary_to_decimal(s):\n"
            "    # accumulate powers of two for each binary digit\n"
            "    value = 0\n"
            "    for i, bit in enumerate(s):\n"
            "        value += int(bit) * 2 ** i\n"
            "    return value\n"
        ),
        "test_list": [
            'assert binary_to_decimal("110") == 6',
            'assert binary_to_decimal("0") == 0',
            'assert binary_to_decimal("1111") == 15',
        ],
        "challenge_test_list": [
            'assert binary_to_decimal("10000000") == 128',
            'assert binary_to_decimal("1") == 1',
            'assert binary_to_decimal("110110") == 54',
        ],
    },
    {
        "task_id": "remove_duplicates",
        "description": "Write a python function to remove duplicate values from a list while keeping the original order.",
        "solution": (
            "def remove_duplicates(xs):\n"
            "    seen = set()\n"
            "    out = []\n"
            "    for x in xs:\n"
            "        if x not in seen:\n"
            "            seen.add(x)\n"
            "            out.append(x)\n"
            "    return out\n"
        ),
        "error_code": (
            "def remove_duplicates(xs):\n"
            "    # drop repeated values from the list\n"
            "    return sorted(set(xs))\n"
        ),
        "test_list": [
            "assert remove_duplicates([1, 2, 1, 3]) == [1, 2, 3]",
            "assert remove_duplicates([]) == []",
            "assert remove_duplicates([1, 1, 1]) == [1]",
        ],
        "challenge_test_list": [
            "assert remove_duplicates([3, 3, 2, 1, 2]) == [3, 2, 1]",
            "assert remove_duplicates([5, 4, 5, 4]) == [5, 4]",
            "assert remove_duplicates([1, 2, 3]) == [1, 2, 3]",
        ],
    },
    {
        "task_id": "power",
        "description": "Write a python function to raise a base to a non-negative integer exponent without using the ** operator.",
        "solution": (
            "def power(base, exp):\n"
            "    result = 1\n"
            "    for _ in range(exp):\n"
            "        result *= base\n"
            "    return result\n"
        ),
        "error_code": (
            "def power(base, exp):\n"
            "    # multiply the base by itself exponent times\n"
            "    return base * exp\n"
        ),
        "test_list": [
            "assert power(2, 3) == 8",
            "assert power(5, 0) == 1",
            "assert power(3, 2) == 9",
        ],
        "challenge_test_list": [
            "assert power(2, 10) == 1024",
            "assert power(1, 100) == 1",
            "assert power(10, 5) == 100000",
        ],
    },
    {
        "task_id": "min_of_three",
        "description": "Write a python function to find the smallest of three numbers.",
        "solution": (
            "def min_of_three(a, b, c):\n"
            "    smallest = a\n"
            "    if b < smallest:\n"
            "        smallest = b\n"
            "    if c < smallest:\n"
            "        smallest = c\n"
            "    return smallest\n"
        ),
        "error_code": (
            "def min_of_three(a, b, c):\n"
            "    # compare the three values pairwise and keep the winner\n"
            "    smallest = a\n"
            "    if b > smallest:\n"
            "        smallest = b\n"
            "    if c > smallest:\n"
            "        smallest = c\n"
            "    return smallest\n"
        ),
        "test_list": [
            "assert min_of_three(1, 2, 3) == 1",
            "assert min_of_three(9, 4, 7) == 4",
            "assert min_of_three(5, 5, 5) == 5",
        ],
        "challenge_test_list": [
            "assert min_of_three(-1, -2, -3) == -3",
            "assert min_of_three(0, 1, -1) == -1",
            "assert min_of_three(100, 50, 75) == 50",
        ],
    },
    {
        "task_id": "count_words",
        "description": "Write a python function to count the whitespace-separated words in a string.",
        "solution": (
            "def count_words(s):\n"
            "    return len(s.split())\n"
        ),
        "error_code": (
            "def count_words(s):\n"
            "    # words are the pieces between space characters\n"
            "    return len(s.split(' '))\n"
        ),
        "test_list": [
            'assert count_words("hello world") == 2',
            'assert count_words("") == 0',
            'assert count_words("one") == 1',
        ],
        "challenge_test_list": [
            'assert count_words("  a  b  ") == 2',
            'assert count_words("a b c d e") == 5',
            'assert count_words("tab\\tsep") == 2',
        ],
    },
    {
        "task_id": "cube_nums",
        "description": "Write a function to compute the cube of each number in a list.",
        "solution": (
            "def cube_nums(nums):\n"
            "    return [n ** 3 for n in nums]\n"
        ),
        "error_code": (
            "def cube_nums(nums):\n"
            "    # raise every element to the third power\n"
            "    return [n ** 2 for n in nums]\n"
        ),
        "test_list": [
            "assert cube_nums([1, 2, 3]) == [1, 8, 27]",
            "assert cube_nums([]) == []",
            "assert cube_nums([0]) == [0]",
        ],
        "challenge_test_list": [
            "assert cube_nums([-2]) == [-8]",
            "assert cube_nums([10]) == [1000]",
            "assert cube_nums([1, -1]) == [1, -1]",
        ],
    },
    {
        "task_id": "merge_sorted",
        "description": "Write a python function to merge two sorted lists into one sorted list.",
        "solution": (
            "def merge_sorted(a, b):\n"
            "    out = []\n"
            "    i = j = 0\n"
            "    while i < len(a) and j < len(b):\n"
            "        if a[i] <= b[j]:\n"
            "            out.append(a[i])\n"
            "            i += 1\n"
            "        else:\n"
            "            out.append(b[j])\n"
            "            j += 1\n"
            "    out.extend(a[i:])\n"
            "    out.extend(b[j:])\n"
            "    return out\n"
        ),
        "error_code": (
            "def merge_sorted(a, b):\n"
            "    # stitch the two sorted sequences together\n"
            "    return a + b\n"
        ),
        "test_list": [
            "assert merge_sorted([1, 3], [2, 4]) == [1, 2, 3, 4]",
            "assert merge_sorted([], [1]) == [1]",
            "assert merge_sorted([1], []) == [1]",
        ],
        "challenge_test_list": [
            "assert merge_sorted([1, 1], [1]) == [1, 1, 1]",
            "assert merge_sorted([5, 6], [1, 2]) == [1, 2, 5, 6]",
            "assert merge_sorted([], []) == []",
        ],
    },
    {
        "task_id": "second_largest",
        "description": "Write a python function to find the second largest element of a list when sorted, counting duplicates.",
        "solution": (
            "def second_largest(xs):\n"
            "    return sorted(xs)[-2]\n"
        ),
        "error_code": (
            "def second_largest(xs):\n"
            "    # order the values and take the one next to the top\n"
            "    return sorted(xs)[-1]\n"
        ),
        "test_list": [
            "assert second_largest([1, 2, 3]) == 2",
            "assert second_largest([5, 1]) == 1",
            "assert second_largest([2, 9, 4]) == 4",
        ],
        "challenge_test_list": [
            "assert second_largest([1, 1, 2]) == 1",
            "assert second_largest([3, 3, 3]) == 3",
            "assert second_largest([10, 20, 30, 40]) == 30",
        ],
    },
]


def run_asserts(code: str, asserts: list[str]) -> list[str]:
    """Return the asserts that fail (or error) against the given code."""
    failures = []
    for expr in asserts:
        namespace: dict = {}
        try:
            exec(code, namespace)
            exec(expr, namespace)
        except Exception as exc:
            failures.append(f"{expr} -> {type(exc).__name__}: {exc}")
    return failures


def main() -> None:
    problems = []
    for task in TASKS:
        all_asserts = task["test_list"] + task["challenge_test_list"]
        sol_failures = run_asserts(task["solution"], all_asserts)
        if sol_failures:
            problems.append(f"{task['task_id']}: solution fails {sol_failures}")
        err_failures = run_asserts(task["error_code"], all_asserts)
        if not err_failures:
            problems.append(f"{task['task_id']}: error code passes every assert")
        try:
            compile(task["error_code"], "<err>", "exec")
        except SyntaxError as exc:
            problems.append(f"{task['task_id']}: error code does not compile: {exc}")
    if problems:
        for p in problems:
            print("PROBLEM:", p)
        raise SystemExit(1)

    corpus_path = ROOT / "src" / "codemend" / "data" / "mini_corpus.jsonl"
    with corpus_path.open("w", encoding="utf-8") as fh:
        for task in TASKS:
            record = {k: task[k] for k in
                      ("task_id", "description", "error_code", "test_list", "challenge_test_list")}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {corpus_path} ({len(TASKS)} tasks)")

    solutions_path = ROOT / "tests" / "reference_solutions.py"
    with solutions_path.open("w", encoding="utf-8") as fh:
        fh.write('"""Hand-validated reference solutions for the mini corpus."""\n\n')
        fh.write("SOLUTIONS = {\n")
        for task in TASKS:
            fh.write(f"    {task['task_id']!r}: {task['solution']!r},\n")
        fh.write("}\n")
    print(f"wrote {solutions_path}")

    lengths = sorted(len(t["error_code"]) for t in TASKS)
    n = len(lengths)
    p33 = lengths[min(n, max(1, math.ceil(0.33 * n))) - 1]
    p66 = lengths[min(n, max(1, math.ceil(0.66 * n))) - 1]
    print(f"lengths: {lengths}")
    print(f"thresholds: p33={p33} p66={p66}")


if __name__ == "__main__":
    main()
