"""Hand-validated reference solutions for the mini corpus."""

SOLUTIONS = {
    'remove_occ': 'def remove_Occ(s, ch):\n    for _ in range(2):\n        idx = s.find(ch)\n        if idx >= 0:\n            s = s[:idx] + s[idx + 1:]\n    idx = s.rfind(ch)\n    if idx >= 0:\n        s = s[:idx] + s[idx + 1:]\n    return s\n',
    'is_woodall': 'def is_woodall(number):\n    if number < 1:\n        return False\n    n = 1\n    while n * (2 ** n) - 1 <= number:\n        if n * (2 ** n) - 1 == number:\n            return True\n        n += 1\n    return False\n',
    'find_max': 'def find_max(nums):\n    best = nums[0]\n    for n in nums[1:]:\n        if n > best:\n            best = n\n    return best\n',
    'count_vowels': "def count_vowels(s):\n    return sum(1 for ch in s if ch.lower() in 'aeiou')\n",
    'reverse_words': "def reverse_words(s):\n    return ' '.join(reversed(s.split()))\n",
    'is_palindrome': 'def is_palindrome(s):\n    return s == s[::-1]\n',
    'sum_digits': 'def sum_digits(n):\n    return sum(int(d) for d in str(n))\n',
    'fib': 'def fib(n):\n    a, b = 0, 1\n    for _ in range(n):\n        a, b = b, a + b\n    return a\n',
    'is_prime': 'def is_prime(n):\n    if n < 2:\n        return False\n    i = 2\n    while i * i <= n:\n        if n % i == 0:\n            return False\n        i += 1\n    return True\n',
    'gcd': 'def gcd(a, b):\n    while b:\n        a, b = b, a % b\n    return a\n',
    'flatten_list': 'def flatten_list(lst):\n    return [item for sub in lst for item in sub]\n',
    'char_frequency': 'def char_frequency(s):\n    freq = {}\n    for ch in s:\n        freq[ch] = freq.get(ch, 0) + 1\n    return freq\n',
    'binary_to_decimal': 'def binary_to_decimal(s):\n    value = 0\n    for bit in s:\n        value = value * 2 + int(bit)\n    return value\n',
    'remove_duplicates': 'def remove_duplicates(xs):\n    seen = set()\n    out = []\n    for x in xs:\n        if x not in seen:\n            seen.add(x)\n            out.append(x)\n    return out\n',
    'power': 'def power(base, exp):\n    result = 1\n    for _ in range(exp):\n        result *= base\n    return result\n',
    'min_of_three': 'def min_of_three(a, b, c):\n    smallest = a\n    if b < smallest:\n        smallest = b\n    if c < smallest:\n        smallest = c\n    return smallest\n',
    'count_words': 'def count_words(s):\n    return len(s.split())\n',
    'cube_nums': 'def cube_nums(nums):\n    return [n ** 3 for n in nums]\n',
    'merge_sorted': 'def merge_sorted(a, b):\n    out = []\n    i = j = 0\n    while i < len(a) and j < len(b):\n        if a[i] <= b[j]:\n            out.append(a[i])\n            i += 1\n        else:\n            out.append(b[j])\n            j += 1\n    out.extend(a[i:])\n    out.extend(b[j:])\n    return out\n',
    'second_largest': 'def second_largest(xs):\n    return sorted(xs)[-2]\n',
}
