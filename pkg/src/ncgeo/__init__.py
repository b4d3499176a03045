# Noncommutative geometry toolkit
