int testme(int x, int y, int tab[]) {
  int v;
  int *pt;
  int **ppt;
  v = x * 2;
  v = v - y;
  pt = &tab[2];
  tab[2] = x;
  ppt = &pt;
  pt = pt + 1;
  *ppt = &tab[2];
  *(pt + v) = y;
  if (tab[y + 4] > 5)
    return 1;
  return 0;
}
