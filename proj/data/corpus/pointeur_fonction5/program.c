int f0(int x)
{
  return x + 2;
}

int f1(int x)
{
  return x;
}

int f2(int x)
{
  return x - 1;
}

unsigned int testme( int a, int b)
{
  int (*tab[3])(int) = {f0, f1, f2};
  int (*pf)(int);
  pf = tab[a + b];
  return pf(a);
}
