int testme( int A[10], int elem) {
  int low, high, mid, ret ;
  low = 0 ;
  high = 9 ;
  ret = 0 ;
  while( ( high > low ) )
    { mid = (low + high) / 2 ;

      if( elem == A[mid] )
         ret = 1;
      if( elem > A[mid] )
        low = mid + 1 ;
      else
        high = mid - 1;
    }
  mid = (low + high) / 2 ;

  if( ( ret != 1)  && ( elem == A[mid]) )
    ret = 1;

  return ret ;
}
